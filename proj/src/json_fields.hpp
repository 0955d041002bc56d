#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "mvtri/error.hpp"

namespace mvtri::detail {

// Reads fields of a JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class FieldReader {
 public:
  FieldReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(ErrorCode::ParseError, where_ + ": expected a JSON object");
  }

  template <typename T>
  bool read(const std::string& key, T& out) {
    const nlohmann::json* value = raw(key);
    if (value == nullptr) return false;
    try {
      out = value->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path(key) + ": " + e.what());
    }
    return true;
  }

  const nlohmann::json* raw(const std::string& key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (known_.count(item.key()) == 0) {
        throw Error(ErrorCode::ParseError, where_ + ": unknown field '" + item.key() + "'");
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> known_;
};

}  // namespace mvtri::detail
