#include "llm4grn/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace llm4grn {

namespace {

using nlohmann::json;

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line = 0;

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError("line " + std::to_string(line) + ": " + message);
    }
    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    void skip_spaces() {
        while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
    }
};

std::string parse_quoted(Cursor& c) {
    ++c.pos;  // opening quote
    std::string out;
    while (true) {
        if (c.done()) c.fail("unterminated string");
        const char ch = c.text[c.pos++];
        if (ch == '"') return out;
        if (ch != '\\') {
            out += ch;
            continue;
        }
        if (c.done()) c.fail("dangling escape");
        const char esc = c.text[c.pos++];
        switch (esc) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            default: c.fail(std::string("unsupported escape \\") + esc);
        }
    }
}

json parse_scalar(Cursor& c) {
    c.skip_spaces();
    if (c.done()) c.fail("missing value");
    if (c.peek() == '"') return parse_quoted(c);

    std::size_t end = c.pos;
    while (end < c.text.size() && c.text[end] != ',' && c.text[end] != ']' &&
           c.text[end] != '#')
        ++end;
    std::string token = trim(c.text.substr(c.pos, end - c.pos));
    c.pos = end;
    if (token.empty()) c.fail("missing value");
    if (token == "true") return true;
    if (token == "false") return false;

    const bool looks_float = token.find_first_of(".eE") != std::string::npos;
    if (!looks_float) {
        long long v = 0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec == std::errc{} && res.ptr == token.data() + token.size()) return v;
    }
    try {
        return parse_double(token, "TOML number");
    } catch (const ParseError&) {
        c.fail("unrecognized value '" + token + "'");
    }
}

json parse_value(Cursor& c) {
    c.skip_spaces();
    if (c.done()) c.fail("missing value");
    if (c.peek() != '[') return parse_scalar(c);

    ++c.pos;  // '['
    json array = json::array();
    c.skip_spaces();
    if (!c.done() && c.peek() == ']') {
        ++c.pos;
        return array;
    }
    while (true) {
        array.push_back(parse_scalar(c));
        c.skip_spaces();
        if (c.done()) c.fail("unterminated array");
        const char ch = c.text[c.pos++];
        if (ch == ']') return array;
        if (ch != ',') c.fail("expected ',' or ']' in array");
        c.skip_spaces();
        // trailing comma before close
        if (!c.done() && c.peek() == ']') {
            ++c.pos;
            return array;
        }
    }
}

std::string parse_key(Cursor& c) {
    c.skip_spaces();
    if (c.done()) c.fail("missing key");
    if (c.peek() == '"') return parse_quoted(c);
    std::size_t end = c.pos;
    while (end < c.text.size() &&
           (std::isalnum(static_cast<unsigned char>(c.text[end])) || c.text[end] == '_' ||
            c.text[end] == '-'))
        ++end;
    if (end == c.pos) c.fail("bad key character");
    std::string key(c.text.substr(c.pos, end - c.pos));
    c.pos = end;
    return key;
}

// Strips a trailing comment, respecting quoted strings.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (in_string) {
            if (ch == '\\') ++i;
            else if (ch == '"') in_string = false;
        } else if (ch == '"') {
            in_string = true;
        } else if (ch == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

std::vector<std::string> split_dotted(Cursor& c, std::string_view name) {
    std::vector<std::string> parts;
    for (auto& part : split(name, '.')) {
        const std::string p = trim(part);
        if (p.empty()) c.fail("empty table-name segment");
        parts.push_back(p);
    }
    return parts;
}

json* descend(json& root, const std::vector<std::string>& parts, Cursor& c) {
    json* node = &root;
    for (const auto& part : parts) {
        if (!node->is_object()) c.fail("table path collides with a value");
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        if (node->is_array()) {
            if (node->empty()) c.fail("table path enters an empty array");
            node = &node->back();
        }
        if (!node->is_object()) c.fail("table path collides with a value");
    }
    return node;
}

}  // namespace

json parse_toml_lite(const std::string& text) {
    json root = json::object();
    json* current = &root;

    std::istringstream lines(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(lines, raw)) {
        ++line_no;
        const std::string_view stripped_view = strip_comment(raw);
        const std::string line = trim(stripped_view);
        if (line.empty()) continue;
        Cursor c{line, 0, line_no};

        if (line.front() == '[') {
            const bool is_array = line.size() > 1 && line[1] == '[';
            const std::string close = is_array ? "]]" : "]";
            const std::size_t open = is_array ? 2 : 1;
            const auto end = line.rfind(close);
            if (end == std::string::npos || end + close.size() != line.size())
                c.fail("malformed table header");
            const auto parts = split_dotted(c, std::string_view(line).substr(open, end - open));
            if (parts.empty()) c.fail("empty table name");

            if (is_array) {
                json* parent = &root;
                for (std::size_t i = 0; i + 1 < parts.size(); ++i)
                    parent = descend(*parent, {parts[i]}, c);
                json& slot = (*parent)[parts.back()];
                if (slot.is_null()) slot = json::array();
                if (!slot.is_array()) c.fail("array-of-tables name collides with a value");
                slot.push_back(json::object());
                current = &slot.back();
            } else {
                current = descend(root, parts, c);
            }
            continue;
        }

        const std::string key = parse_key(c);
        c.skip_spaces();
        if (c.done() || c.text[c.pos] != '=') c.fail("expected '=' after key");
        ++c.pos;
        json value = parse_value(c);
        c.skip_spaces();
        if (!c.done()) c.fail("trailing content after value");
        if (current->contains(key)) c.fail("duplicate key '" + key + "'");
        (*current)[key] = std::move(value);
    }
    return root;
}

json load_toml_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_toml_lite(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace llm4grn
