#pragma once

// Minimal JSON Schema checker covering the keywords used by the report
// schemas in schemas/: type, properties, required, additionalProperties
// (boolean), items, minItems, maxItems, enum, const, minimum, maximum and
// local $ref into "definitions".

#include "json.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace rydcz {

class JsonSchemaValidator {
 public:
  explicit JsonSchemaValidator(nlohmann::ordered_json schema) : root_(std::move(schema)) {}

  /// Every violation, each prefixed by a JSON pointer to the offending value.
  [[nodiscard]] std::vector<std::string> validate(const nlohmann::ordered_json& doc) const {
    std::vector<std::string> errors;
    check(root_, doc, "", errors);
    return errors;
  }

 private:
  nlohmann::ordered_json root_;

  const nlohmann::ordered_json& resolve(const nlohmann::ordered_json& schema) const {
    if (!schema.is_object() || !schema.contains("$ref")) return schema;
    const std::string ref = schema["$ref"].get<std::string>();
    const std::string prefix = "#/definitions/";
    if (ref.rfind(prefix, 0) != 0) throw std::invalid_argument("JsonSchemaValidator: unsupported $ref " + ref);
    return resolve(root_.at("definitions").at(ref.substr(prefix.size())));
  }

  static bool has_type(const nlohmann::ordered_json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())));
    if (t == "number") return v.is_number();
    throw std::invalid_argument("JsonSchemaValidator: unknown type " + t);
  }

  void check(const nlohmann::ordered_json& schema_in, const nlohmann::ordered_json& v, const std::string& path,
             std::vector<std::string>& errors) const {
    const auto& schema = resolve(schema_in);
    const std::string where = path.empty() ? "/" : path;
    if (schema.contains("type")) {
      const auto& t = schema["type"];
      std::vector<std::string> types;
      if (t.is_array()) for (const auto& x : t) types.push_back(x.get<std::string>());
      else types.push_back(t.get<std::string>());
      if (std::none_of(types.begin(), types.end(), [&](const auto& x) { return has_type(v, x); })) {
        errors.push_back(where + ": expected type " + t.dump() + ", got " + v.type_name());
        return;
      }
    }
    if (schema.contains("const") && v != schema["const"]) errors.push_back(where + ": expected " + schema["const"].dump());
    if (schema.contains("enum")) {
      const auto& e = schema["enum"];
      if (std::find(e.begin(), e.end(), v) == e.end()) errors.push_back(where + ": value not in " + e.dump());
    }
    if (v.is_number()) {
      const double x = v.get<double>();
      if (schema.contains("minimum") && x < schema["minimum"].get<double>())
        errors.push_back(where + ": below minimum " + schema["minimum"].dump());
      if (schema.contains("maximum") && x > schema["maximum"].get<double>())
        errors.push_back(where + ": above maximum " + schema["maximum"].dump());
    }
    if (v.is_object()) {
      if (schema.contains("required"))
        for (const auto& k : schema["required"])
          if (!v.contains(k.get<std::string>())) errors.push_back(where + ": missing property '" + k.get<std::string>() + "'");
      const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
      for (const auto& [k, child] : v.items()) {
        if (schema.contains("properties") && schema["properties"].contains(k))
          check(schema["properties"][k], child, path + "/" + k, errors);
        else if (closed)
          errors.push_back(where + ": unexpected property '" + k + "'");
        else if (schema.contains("additionalProperties") && schema["additionalProperties"].is_object())
          check(schema["additionalProperties"], child, path + "/" + k, errors);
      }
    }
    if (v.is_array()) {
      if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>())
        errors.push_back(where + ": fewer than " + schema["minItems"].dump() + " items");
      if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>())
        errors.push_back(where + ": more than " + schema["maxItems"].dump() + " items");
      if (schema.contains("items"))
        for (std::size_t i = 0; i < v.size(); ++i) check(schema["items"], v[i], path + "/" + std::to_string(i), errors);
    }
  }
};

}  // namespace rydcz
