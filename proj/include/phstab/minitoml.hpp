#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace phstab::toml {

/// Minimal TOML reader covering the subset used by the experiment configs:
/// bare keys, [tables], [[arrays of tables]], strings, numbers, booleans and
/// (possibly nested, multi-line) arrays.

class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Value;
using Array = std::vector<Value>;
using Table = std::map<std::string, Value>;

struct Value {
    std::variant<std::string, double, bool, Array, Table> data;

    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_number() const { return std::holds_alternative<double>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_array() const { return std::holds_alternative<Array>(data); }
    bool is_table() const { return std::holds_alternative<Table>(data); }

    const std::string& as_string() const { return std::get<std::string>(data); }
    double as_number() const { return std::get<double>(data); }
    bool as_bool() const { return std::get<bool>(data); }
    const Array& as_array() const { return std::get<Array>(data); }
    const Table& as_table() const { return std::get<Table>(data); }
    Table& as_table() { return std::get<Table>(data); }
};

Table parse(const std::string& text);
Table parse_file(const std::string& path);

/// Lookup helpers; `find` returns nullptr when the key is absent.
const Value* find(const Table& tbl, const std::string& key);

}  // namespace phstab::toml
