#include "synthaudit/cli.hpp"

int main(int argc, char** argv) { return synthaudit::run_cli(argc, argv); }
