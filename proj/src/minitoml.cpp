#include "phstab/minitoml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace phstab::toml {

namespace {

class Parser {
  public:
    explicit Parser(const std::string& text) : text_(text) {}

    Table parse() {
        Table root;
        Table* current = &root;
        skip_ws_and_comments(true);
        while (!eof()) {
            if (peek() == '[') {
                current = parse_table_header(root);
            } else {
                parse_key_value(*current);
            }
            skip_ws_and_comments(true);
        }
        return root;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream oss;
        oss << "TOML parse error at line " << line_ << ": " << msg;
        throw ParseError(oss.str());
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    char get() {
        const char c = text_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    void skip_ws_and_comments(bool cross_newlines) {
        while (!eof()) {
            const char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') get();
            } else if (c == ' ' || c == '\t' || c == '\r') {
                get();
            } else if (c == '\n' && cross_newlines) {
                get();
            } else {
                break;
            }
        }
    }

    std::string parse_bare_key() {
        std::string key;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                          peek() == '-'))
            key += get();
        if (key.empty()) fail("expected a key");
        return key;
    }

    std::vector<std::string> parse_dotted_key() {
        std::vector<std::string> parts{parse_bare_key()};
        while (!eof() && peek() == '.') {
            get();
            parts.push_back(parse_bare_key());
        }
        return parts;
    }

    Table* descend(Table& root, const std::vector<std::string>& parts, bool array_of_tables) {
        Table* cur = &root;
        for (size_t i = 0; i < parts.size(); ++i) {
            const bool last = i + 1 == parts.size();
            auto it = cur->find(parts[i]);
            if (last && array_of_tables) {
                if (it == cur->end())
                    it = cur->emplace(parts[i], Value{Array{}}).first;
                if (!it->second.is_array()) fail("'" + parts[i] + "' is not an array of tables");
                auto& arr = std::get<Array>(it->second.data);
                arr.push_back(Value{Table{}});
                return &std::get<Table>(arr.back().data);
            }
            if (it == cur->end()) it = cur->emplace(parts[i], Value{Table{}}).first;
            if (it->second.is_array()) {
                auto& arr = std::get<Array>(it->second.data);
                if (arr.empty() || !arr.back().is_table())
                    fail("'" + parts[i] + "' is not a table");
                cur = &std::get<Table>(arr.back().data);
            } else if (it->second.is_table()) {
                cur = &it->second.as_table();
            } else {
                fail("'" + parts[i] + "' is not a table");
            }
        }
        return cur;
    }

    Table* parse_table_header(Table& root) {
        get();  // '['
        const bool array_of_tables = !eof() && peek() == '[';
        if (array_of_tables) get();
        skip_ws_and_comments(false);
        const auto parts = parse_dotted_key();
        skip_ws_and_comments(false);
        if (eof() || get() != ']') fail("expected ']' in table header");
        if (array_of_tables && (eof() || get() != ']')) fail("expected ']]' in table header");
        return descend(root, parts, array_of_tables);
    }

    void parse_key_value(Table& tbl) {
        const auto parts = parse_dotted_key();
        skip_ws_and_comments(false);
        if (eof() || get() != '=') fail("expected '=' after key");
        skip_ws_and_comments(false);
        Value v = parse_value();
        Table* target = &tbl;
        for (size_t i = 0; i + 1 < parts.size(); ++i) {
            auto it = target->find(parts[i]);
            if (it == target->end()) it = target->emplace(parts[i], Value{Table{}}).first;
            if (!it->second.is_table()) fail("'" + parts[i] + "' is not a table");
            target = &it->second.as_table();
        }
        if (target->count(parts.back())) fail("duplicate key '" + parts.back() + "'");
        target->emplace(parts.back(), std::move(v));
    }

    Value parse_value() {
        if (eof()) fail("expected a value");
        const char c = peek();
        if (c == '"') return parse_string();
        if (c == '[') return parse_array();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::string word = parse_bare_key();
            if (word == "true") return Value{true};
            if (word == "false") return Value{false};
            fail("unexpected token '" + word + "'");
        }
        return parse_number();
    }

    Value parse_string() {
        get();  // '"'
        std::string s;
        while (!eof() && peek() != '"') {
            char c = get();
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                const char e = get();
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail("unsupported escape sequence");
                }
            } else if (c == '\n') {
                fail("unterminated string");
            }
            s += c;
        }
        if (eof()) fail("unterminated string");
        get();  // closing '"'
        return Value{std::move(s)};
    }

    Value parse_array() {
        get();  // '['
        Array arr;
        skip_ws_and_comments(true);
        while (!eof() && peek() != ']') {
            arr.push_back(parse_value());
            skip_ws_and_comments(true);
            if (!eof() && peek() == ',') {
                get();
                skip_ws_and_comments(true);
            }
        }
        if (eof()) fail("unterminated array");
        get();  // ']'
        return Value{std::move(arr)};
    }

    Value parse_number() {
        const size_t start = pos_;
        while (!eof() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '+' ||
                          peek() == '-' || peek() == '.' || peek() == 'e' || peek() == 'E' ||
                          peek() == '_'))
            get();
        std::string tok = text_.substr(start, pos_ - start);
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        if (tok.empty()) fail("expected a number");
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) fail("invalid number '" + tok + "'");
        return Value{v};
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace

Table parse(const std::string& text) { return Parser(text).parse(); }

Table parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::ostringstream oss;
    oss << in.rdbuf();
    return parse(oss.str());
}

const Value* find(const Table& tbl, const std::string& key) {
    auto it = tbl.find(key);
    return it == tbl.end() ? nullptr : &it->second;
}

}  // namespace phstab::toml
