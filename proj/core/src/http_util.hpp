#pragma once

#include <httplib.h>

#include <string>
#include <string_view>

#include "valueprobe/error.hpp"

namespace valueprobe::detail {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // "/..." (never empty)
};

inline Endpoint split_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error("endpoint '" + std::string(url) + "' has no scheme");
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_begin == std::string_view::npos) {
    ep.origin = std::string(url);
    ep.path = "/";
  } else {
    ep.origin = std::string(url.substr(0, path_begin));
    ep.path = std::string(url.substr(path_begin));
  }
  return ep;
}

}  // namespace valueprobe::detail
