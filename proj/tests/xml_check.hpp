#pragma once

// Minimal well-formedness check for the SVG output: balanced tags, quoted
// attributes, no stray '<' or '&'. Enough for generated documents.

#include <string>
#include <string_view>
#include <vector>

namespace xml_check {

inline bool well_formed(std::string_view s, std::string* why = nullptr)
{
    auto bad = [&](std::string msg) {
        if (why) *why = std::move(msg);
        return false;
    };
    std::vector<std::string> stack;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '&') {
            const auto semi = s.find(';', i);
            if (semi == std::string_view::npos || semi - i > 8) return bad("bare ampersand");
            i = semi + 1;
            continue;
        }
        if (s[i] != '<') {
            ++i;
            continue;
        }
        if (s.substr(i, 5) == "<?xml") {
            const auto e = s.find("?>", i);
            if (e == std::string_view::npos) return bad("unterminated declaration");
            i = e + 2;
            continue;
        }
        const auto close = s.find('>', i);
        if (close == std::string_view::npos) return bad("unterminated tag");
        std::string_view tag = s.substr(i + 1, close - i - 1);
        if (tag.find('<') != std::string_view::npos) return bad("'<' inside tag");
        std::size_t quotes = 0;
        for (char c : tag) quotes += c == '"';
        if (quotes % 2) return bad("unbalanced quotes");
        if (!tag.empty() && tag[0] == '/') {
            const std::string name(tag.substr(1));
            if (stack.empty() || stack.back() != name) return bad("mismatched </" + name + ">");
            stack.pop_back();
        } else if (!tag.empty() && tag.back() == '/') {
            // self-closing
        } else {
            const auto sp = tag.find_first_of(" \t\n");
            stack.emplace_back(tag.substr(0, sp));
        }
        i = close + 1;
    }
    if (!stack.empty()) return bad("unclosed <" + stack.back() + ">");
    return true;
}

inline std::size_t count(std::string_view s, std::string_view needle)
{
    std::size_t n = 0;
    for (auto p = s.find(needle); p != std::string_view::npos; p = s.find(needle, p + 1)) ++n;
    return n;
}

} // namespace xml_check
