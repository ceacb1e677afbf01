#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "agora/common.hpp"

namespace agora::desc {

struct Component;
using ComponentPtr = std::shared_ptr<Component>;

// A symbolic link to another attribute or component in the tree.
//   Attrib      — nearest enclosing scope that defines the name
//   Path        — walk child names down from the root (sfConfig:...)
//   ParentChain — climb `hops` parents, then walk down
struct Reference {
    enum class Kind { Attrib, Path, ParentChain };
    Kind kind = Kind::Attrib;
    bool lazy = false;
    int hops = 0;
    std::vector<std::string> segments;

    bool operator==(const Reference& o) const {
        return kind == o.kind && lazy == o.lazy && hops == o.hops && segments == o.segments;
    }

    std::string str() const {
        std::string out = lazy ? "LAZY " : "";
        switch (kind) {
            case Kind::Attrib:
                out += "ATTRIB " + segments.front();
                break;
            case Kind::Path:
                out += "sfConfig";
                for (const auto& s : segments) out += ":" + s;
                break;
            case Kind::ParentChain:
                for (int i = 0; i < hops; ++i) out += i ? ":PARENT" : "PARENT";
                for (const auto& s : segments) out += ":" + s;
                break;
        }
        return out;
    }
};

struct Value {
    std::variant<std::string, int64_t, double, bool, Reference, ComponentPtr> v;

    Value() : v(std::string()) {}
    Value(std::string s) : v(std::move(s)) {}
    Value(const char* s) : v(std::string(s)) {}
    Value(int64_t i) : v(i) {}
    Value(int i) : v(int64_t{i}) {}
    Value(double d) : v(d) {}
    Value(bool b) : v(b) {}
    Value(Reference r) : v(std::move(r)) {}
    Value(ComponentPtr c) : v(std::move(c)) {}

    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_int() const { return std::holds_alternative<int64_t>(v); }
    bool is_real() const { return std::holds_alternative<double>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_ref() const { return std::holds_alternative<Reference>(v); }
    bool is_component() const { return std::holds_alternative<ComponentPtr>(v); }

    const std::string& as_string() const { return std::get<std::string>(v); }
    int64_t as_int() const { return std::get<int64_t>(v); }
    double as_real() const { return std::get<double>(v); }
    bool as_bool() const { return std::get<bool>(v); }
    const Reference& as_ref() const { return std::get<Reference>(v); }
    Reference& as_ref() { return std::get<Reference>(v); }
    const ComponentPtr& as_component() const { return std::get<ComponentPtr>(v); }

    // Numeric attributes accept either literal form where a real is wanted.
    double as_number() const { return is_int() ? static_cast<double>(as_int()) : as_real(); }

    bool operator==(const Value& o) const;
    Value clone() const;
};

struct Entry {
    std::string name;
    Value value;
    int line = 0;  // diagnostics only; ignored by equality

    bool operator==(const Entry& o) const { return name == o.name && value == o.value; }
};

// One node of the description tree. Entries are ordered and unique by name;
// an entry whose value is a component is a child, anything else is an
// attribute.
struct Component {
    std::string extends;          // prototype name; empty once flattened
    std::vector<Entry> entries;
    int line = 0;

    const Entry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
    Entry* find(const std::string& name) {
        for (auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
    bool has(const std::string& name) const { return find(name) != nullptr; }

    const Component* child(const std::string& name) const {
        const Entry* e = find(name);
        return e && e->value.is_component() ? e->value.as_component().get() : nullptr;
    }
    Component* child(const std::string& name) {
        Entry* e = find(name);
        return e && e->value.is_component() ? e->value.as_component().get() : nullptr;
    }

    // Attribute views with type checks that fail loudly; `path` names the
    // node in diagnostics.
    const Value& attr(const std::string& name) const {
        const Entry* e = find(name);
        if (!e) fail("missing_attribute", "attribute not set: " + name);
        return e->value;
    }
    std::string get_string(const std::string& name) const {
        const Value& v = attr(name);
        if (!v.is_string()) fail("bad_attribute", name + " must be a string");
        return v.as_string();
    }
    std::string get_string(const std::string& name, const std::string& fallback) const {
        const Entry* e = find(name);
        return e ? get_string(name) : fallback;
    }
    int64_t get_int(const std::string& name) const {
        const Value& v = attr(name);
        if (!v.is_int()) fail("bad_attribute", name + " must be an integer");
        return v.as_int();
    }
    int64_t get_int(const std::string& name, int64_t fallback) const {
        const Entry* e = find(name);
        return e ? get_int(name) : fallback;
    }
    double get_number(const std::string& name) const {
        const Value& v = attr(name);
        if (!v.is_int() && !v.is_real()) fail("bad_attribute", name + " must be numeric");
        return v.as_number();
    }
    double get_number(const std::string& name, double fallback) const {
        const Entry* e = find(name);
        return e ? get_number(name) : fallback;
    }
    bool get_bool(const std::string& name, bool fallback) const {
        const Entry* e = find(name);
        if (!e) return fallback;
        if (!e->value.is_bool()) fail("bad_attribute", name + " must be a boolean");
        return e->value.as_bool();
    }

    // Override-or-append, the primitive behind prototype extension.
    void set(const std::string& name, Value value) {
        if (Entry* e = find(name))
            e->value = std::move(value);
        else
            entries.push_back(Entry{name, std::move(value), 0});
    }

    bool operator==(const Component& o) const {
        return extends == o.extends && entries == o.entries;
    }

    Component clone() const {
        Component c;
        c.extends = extends;
        c.line = line;
        c.entries.reserve(entries.size());
        for (const auto& e : entries) c.entries.push_back(Entry{e.name, e.value.clone(), e.line});
        return c;
    }
};

inline bool Value::operator==(const Value& o) const {
    if (v.index() != o.v.index()) return false;
    if (is_component()) return *as_component() == *o.as_component();
    return v == o.v;
}

inline Value Value::clone() const {
    if (is_component()) return Value(std::make_shared<Component>(as_component()->clone()));
    return *this;
}

// A parsed file: named top-level components, order preserved.
struct Document {
    std::vector<Entry> tops;

    const Component* top(const std::string& name) const {
        for (const auto& e : tops)
            if (e.name == name) return e.value.as_component().get();
        return nullptr;
    }

    bool operator==(const Document& o) const { return tops == o.tops; }
};

inline constexpr const char* kRootName = "sfConfig";
inline constexpr const char* kClassAttr = "sfClass";

}  // namespace agora::desc
