#include "urbangen/common/http.hpp"

#include <httplib.h>

namespace urbangen::http {

namespace {

struct Target {
  std::string host;  // scheme://host[:port]
  std::string path;
};

Target split(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Headers to_headers(const Headers& h) { return {h.begin(), h.end()}; }

std::optional<Response> convert(const httplib::Result& res, std::string* error) {
  if (!res) {
    if (error) *error = httplib::to_string(res.error());
    return std::nullopt;
  }
  return Response{res->status, res->body, res->get_header_value("Content-Type")};
}

}  // namespace

std::optional<Response> post(const std::string& url, const std::string& body, const std::string& content_type,
                             const Headers& headers, std::string* error, int timeout_seconds) {
  const Target t = split(url);
  httplib::Client client(t.host);
  client.set_connection_timeout(10);
  client.set_read_timeout(timeout_seconds);
  return convert(client.Post(t.path, to_headers(headers), body, content_type), error);
}

std::optional<Response> post_form(const std::string& url, const std::map<std::string, std::string>& fields,
                                  std::string* error, int timeout_seconds) {
  const Target t = split(url);
  httplib::Client client(t.host);
  client.set_connection_timeout(10);
  client.set_read_timeout(timeout_seconds);
  httplib::Params params(fields.begin(), fields.end());
  return convert(client.Post(t.path, params), error);
}

std::optional<Response> get(const std::string& url, const std::map<std::string, std::string>& query,
                            const Headers& headers, std::string* error, int timeout_seconds) {
  const Target t = split(url);
  httplib::Client client(t.host);
  client.set_connection_timeout(10);
  client.set_read_timeout(timeout_seconds);
  httplib::Params params(query.begin(), query.end());
  return convert(client.Get(t.path, params, to_headers(headers)), error);
}

}  // namespace urbangen::http
