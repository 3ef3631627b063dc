#include "synthaudit/matrix.hpp"

#include "synthaudit/error.hpp"

namespace synthaudit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kInvalidArgument, "matrix data size mismatch");
  }
}

}  // namespace synthaudit
