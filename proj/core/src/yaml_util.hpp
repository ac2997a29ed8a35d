#pragma once

// Private helpers for the YAML-based file formats. Every accessor reports
// failures as LoadError with the 1-based line of the offending node.

#include <yaml-cpp/yaml.h>

#include <Eigen/Core>
#include <optional>
#include <string>

#include "eversim/error.hpp"

namespace eversim::detail {

class YamlDoc {
 public:
  YamlDoc(const std::string& text, std::string source) : source_(std::move(source)) {
    try {
      root_ = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
      throw LoadError(source_, e.mark.line + 1, "", e.msg);
    }
    if (!root_.IsMap()) throw LoadError(source_, 1, "", "top level must be a mapping");
  }

  const YAML::Node& root() const { return root_; }
  const std::string& source() const { return source_; }

  // Checks the `format:` header ("<kind>/<version>").
  void expect_format(const std::string& kind, int version) const {
    const YAML::Node f = root_["format"];
    if (!f) throw LoadError(source_, 1, "format", "missing versioned header, expected '" + kind + "/" +
                                                      std::to_string(version) + "'");
    const std::string value = f.as<std::string>();
    const std::string want = kind + "/" + std::to_string(version);
    if (value != want) throw error(f, "format", "unsupported format '" + value + "', expected '" + want + "'");
  }

  LoadError error(const YAML::Node& node, const std::string& field, const std::string& message) const {
    const int line = node.IsDefined() ? node.Mark().line + 1 : 0;
    return LoadError(source_, line, field, message);
  }

  // Line of `parent` is used when `key` is missing.
  YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& path) const {
    const YAML::Node n = parent[key];
    if (!n) throw error(parent, path, "required field missing");
    return n;
  }

  template <typename T>
  T as(const YAML::Node& node, const std::string& path) const {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      throw error(node, path, "has the wrong type");
    }
  }

  double number(const YAML::Node& parent, const std::string& key, const std::string& path,
                std::optional<double> fallback = std::nullopt) const {
    const YAML::Node n = parent[key];
    if (!n) {
      if (fallback) return *fallback;
      throw error(parent, path, "required field missing");
    }
    return as<double>(n, path);
  }

  int integer(const YAML::Node& parent, const std::string& key, const std::string& path,
              std::optional<int> fallback = std::nullopt) const {
    const YAML::Node n = parent[key];
    if (!n) {
      if (fallback) return *fallback;
      throw error(parent, path, "required field missing");
    }
    return as<int>(n, path);
  }

  std::string string(const YAML::Node& parent, const std::string& key, const std::string& path,
                     std::optional<std::string> fallback = std::nullopt) const {
    const YAML::Node n = parent[key];
    if (!n) {
      if (fallback) return *fallback;
      throw error(parent, path, "required field missing");
    }
    return as<std::string>(n, path);
  }

  bool boolean(const YAML::Node& parent, const std::string& key, const std::string& path, bool fallback) const {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    return as<bool>(n, path);
  }

  Eigen::Vector3d vec3(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence() || node.size() != 3) throw error(node, path, "expected [x, y, z]");
    return {as<double>(node[0], path), as<double>(node[1], path), as<double>(node[2], path)};
  }

 private:
  std::string source_;
  YAML::Node root_;
};

std::string read_text_file(const std::string& path);

}  // namespace eversim::detail
