#pragma once

#include <string>

#include "agora/desc/ast.hpp"

namespace agora::desc {

namespace detail {

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += "\"";
    return out;
}

// Shortest decimal that round-trips, with a real marker so the reparse
// stays a real.
inline std::string print_real(double d) {
    std::string s = format_real(d);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find('E') == std::string::npos)
        s += ".0";
    return s;
}

inline void print_component(std::string& out, const std::string& name, const Component& comp,
                            int depth) {
    std::string ind(static_cast<size_t>(depth) * 2, ' ');
    out += ind + name;
    if (!comp.extends.empty()) out += " extends " + comp.extends;
    out += " {\n";
    for (const auto& e : comp.entries) {
        if (e.value.is_component()) {
            print_component(out, e.name, *e.value.as_component(), depth + 1);
            continue;
        }
        out += ind + "  " + e.name + " ";
        if (e.value.is_string()) out += quote(e.value.as_string());
        else if (e.value.is_int()) out += std::to_string(e.value.as_int());
        else if (e.value.is_real()) out += print_real(e.value.as_real());
        else if (e.value.is_bool()) out += e.value.as_bool() ? "true" : "false";
        else if (e.value.is_ref()) out += "REF " + e.value.as_ref().str();
        out += ";\n";
    }
    out += ind + "}\n";
}

}  // namespace detail

inline std::string print(const Document& doc) {
    std::string out;
    for (size_t i = 0; i < doc.tops.size(); ++i) {
        if (i) out += "\n";
        detail::print_component(out, doc.tops[i].name, *doc.tops[i].value.as_component(), 0);
    }
    return out;
}

inline std::string print(const Component& comp, const std::string& name = kRootName) {
    std::string out;
    detail::print_component(out, name, comp, 0);
    return out;
}

}  // namespace agora::desc
