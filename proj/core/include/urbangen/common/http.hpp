#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace urbangen::http {

struct Response {
  int status = 0;
  std::string body;
  std::string content_type;
};

using Headers = std::map<std::string, std::string>;

// Single attempt. Returns nullopt on transport failure (connection refused,
// timeout) with `error` filled in; HTTP error statuses are returned as-is.
std::optional<Response> post(const std::string& url, const std::string& body, const std::string& content_type,
                             const Headers& headers, std::string* error, int timeout_seconds = 120);
std::optional<Response> post_form(const std::string& url, const std::map<std::string, std::string>& fields,
                                  std::string* error, int timeout_seconds = 120);
std::optional<Response> get(const std::string& url, const std::map<std::string, std::string>& query,
                            const Headers& headers, std::string* error, int timeout_seconds = 60);

}  // namespace urbangen::http
