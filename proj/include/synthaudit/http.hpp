#pragma once

#include <string>

namespace synthaudit {

// POSTs a JSON body to base_url + path and returns the response body.
// base_url is "http://host[:port][/prefix]". Throws Error(kEndpoint) on
// transport failure or a non-2xx status.
std::string post_json(const std::string& base_url, const std::string& path,
                      const std::string& body, double timeout_seconds);

}  // namespace synthaudit
