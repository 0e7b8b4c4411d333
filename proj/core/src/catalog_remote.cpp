#include <thread>

#include "catalog_json.hpp"
#include "httplib.h"
#include "phenosample/catalog.hpp"
#include "phenosample/error.hpp"

namespace phenosample {
namespace {

struct Page {
  std::vector<SceneRecord> records;
  std::optional<std::string> next_token;
};

Page decode_page(const std::string& body, std::size_t page_number) {
  detail::json j;
  try {
    j = detail::json::parse(body);
  } catch (const detail::json::exception& e) {
    throw DecodeError("page " + std::to_string(page_number) + ": malformed JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("records") || !j.at("records").is_array()) {
    throw DecodeError("page " + std::to_string(page_number) + ": response lacks a 'records' array");
  }
  Page page;
  const auto& records = j.at("records");
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      page.records.push_back(detail::scene_from_json(records[i]));
    } catch (const std::exception& e) {
      throw DecodeError("page " + std::to_string(page_number) + ", record " + std::to_string(i) + ": " + e.what());
    }
  }
  if (j.contains("next_token") && !j.at("next_token").is_null()) {
    page.next_token = j.at("next_token").get<std::string>();
  }
  return page;
}

}  // namespace

RemoteCatalog::RemoteCatalog(std::string url, RemoteOptions options) : options_(options) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) throw ConfigError("remote catalog URL must start with http://: " + url);
  const auto slash = url.find('/', scheme.size());
  origin_ = slash == std::string::npos ? url : url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (options_.page_limit < 1 || options_.max_attempts < 1) {
    throw ConfigError("remote catalog page_limit and max_attempts must be positive");
  }
}

std::vector<SceneRecord> RemoteCatalog::fetch(const GeoPoint& point, const DayWindow& window,
                                              const SelectionPolicy& policy) const {
  httplib::Client client(origin_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);

  detail::json request;
  request["point"] = {{"id", point.id}, {"lat", point.lat}, {"lon", point.lon}};
  request["datetime"] = window_datetime_ranges(window, policy);
  request["limit"] = options_.page_limit;
  request["token"] = nullptr;

  std::vector<SceneRecord> out;
  for (std::size_t page_number = 0;; ++page_number) {
    const std::string body = request.dump();
    std::string last_error;
    std::optional<std::string> response_body;
    auto backoff = options_.initial_backoff;
    for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
      const auto res = client.Post(path_, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
      } else if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
      } else if (res->status != 200) {
        throw TransportError(origin_ + path_ + ": HTTP " + std::to_string(res->status) + " for point " +
                             std::to_string(point.id));
      } else {
        response_body = res->body;
        break;
      }
      if (attempt < options_.max_attempts) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    }
    if (!response_body) {
      throw TransportError(origin_ + path_ + ": giving up after " + std::to_string(options_.max_attempts) +
                           " attempts for point " + std::to_string(point.id) + ": " + last_error);
    }
    Page page = decode_page(*response_body, page_number);
    std::move(page.records.begin(), page.records.end(), std::back_inserter(out));
    if (!page.next_token) break;
    request["token"] = *page.next_token;
  }
  return out;
}

std::unique_ptr<CatalogBackend> open_catalog(const std::string& path_or_url, RemoteOptions options) {
  if (path_or_url.rfind("http://", 0) == 0 || path_or_url.rfind("https://", 0) == 0) {
    return std::make_unique<RemoteCatalog>(path_or_url, options);
  }
  return std::make_unique<LocalCatalog>(LocalCatalog::load(path_or_url));
}

}  // namespace phenosample
