#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "agora/desc/ast.hpp"

namespace agora::desc {

namespace detail {

inline std::string join_path(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += "/";
        out += p;
    }
    return out;
}

// Prototype table with memoized flattening and cycle detection.
class Flattener {
public:
    explicit Flattener(const std::map<std::string, const Component*>& protos) : protos_(protos) {}

    // Returns `node` with every `extends` expanded, recursively.
    Component flatten(const Component& node, const std::string& where) {
        Component out;
        if (node.extends.empty()) {
            out = node.clone();
        } else {
            auto it = protos_.find(node.extends);
            if (it == protos_.end())
                fail("unknown_prototype",
                     where + ": extends unknown prototype '" + node.extends + "'");
            Component base = flat_proto(node.extends);
            // Override keeps the prototype's position; additions append in
            // source order.
            for (const auto& e : node.entries) base.set(e.name, e.value.clone());
            out = std::move(base);
            out.extends.clear();
            out.line = node.line;
        }
        for (auto& e : out.entries)
            if (e.value.is_component())
                e.value = Value(std::make_shared<Component>(
                    flatten(*e.value.as_component(), where + "/" + e.name)));
        return out;
    }

private:
    Component flat_proto(const std::string& name) {
        if (auto it = memo_.find(name); it != memo_.end()) return it->second.clone();
        if (visiting_.count(name)) {
            std::string cycle;
            for (const auto& n : chain_) cycle += n + " -> ";
            fail("extends_cycle", "prototype cycle: " + cycle + name);
        }
        visiting_.insert(name);
        chain_.push_back(name);
        Component flat = flatten(*protos_.at(name), "prototype " + name);
        chain_.pop_back();
        visiting_.erase(name);
        memo_.emplace(name, flat.clone());
        return flat;
    }

    const std::map<std::string, const Component*>& protos_;
    std::map<std::string, Component> memo_;
    std::set<std::string> visiting_;
    std::vector<std::string> chain_;
};

// In-place reference resolution over a flattened tree. Non-lazy references
// are replaced by deep copies of their targets; lazy ones stay symbolic.
class Resolver {
public:
    explicit Resolver(Component& root, bool force_lazy = false)
        : root_(root), force_lazy_(force_lazy) {}

    void run() { resolve_component(root_, {&root_}, {kRootName}); }

    // Resolves just the references sitting directly on the node at `down`
    // (child names below the root), using that node's proper scope chain.
    void resolve_node(const std::vector<std::string>& down) {
        Scope scope{&root_};
        std::vector<std::string> path{kRootName};
        for (const auto& seg : down) {
            Component* next = scope.back()->child(seg);
            if (!next)
                fail("unresolved_reference", join_path(path) + ": no child '" + seg + "'");
            scope.push_back(next);
            path.push_back(seg);
        }
        Component& node = *scope.back();
        for (auto& e : node.entries)
            if (e.value.is_ref() && (!e.value.as_ref().lazy || force_lazy_))
                e.value = resolve_entry(node, e.name, scope, path);
    }

private:
    using Scope = std::vector<Component*>;

    void resolve_component(Component& comp, Scope scope, std::vector<std::string> path) {
        for (auto& e : comp.entries) {
            if (e.value.is_ref()) {
                if (e.value.as_ref().lazy && !force_lazy_) continue;
                e.value = resolve_entry(comp, e.name, scope, path);
            }
            if (e.value.is_component()) {
                Scope inner = scope;
                inner.push_back(e.value.as_component().get());
                auto inner_path = path;
                inner_path.push_back(e.name);
                resolve_component(*e.value.as_component(), std::move(inner),
                                  std::move(inner_path));
            }
        }
    }

    Value resolve_entry(Component& comp, const std::string& name, const Scope& scope,
                        const std::vector<std::string>& path) {
        auto key = std::make_pair(&comp, name);
        if (in_progress_.count(key))
            fail("reference_cycle", join_path(path) + ":" + name + ": reference cycle");
        in_progress_.insert(key);
        Entry* e = comp.find(name);
        Reference ref = e->value.as_ref();
        Value out = lookup(ref, scope, path, name);
        in_progress_.erase(key);
        return out;
    }

    Value lookup(const Reference& ref, const Scope& scope, const std::vector<std::string>& path,
                 const std::string& at) {
        std::string where = join_path(path) + ":" + at + ": ";
        switch (ref.kind) {
            case Reference::Kind::Attrib: {
                const std::string& want = ref.segments.front();
                bool skipped_self = false;
                for (size_t i = scope.size(); i-- > 0;) {
                    Component* c = scope[i];
                    if (!c->has(want)) continue;
                    // An attribute may shadow the enclosing one it copies
                    // (x REF ATTRIB x): skip entries currently being
                    // resolved and keep searching outward.
                    if (in_progress_.count(std::make_pair(c, want))) {
                        skipped_self = true;
                        continue;
                    }
                    Scope enclosing(scope.begin(), scope.begin() + i + 1);
                    std::vector<std::string> epath(path.begin(), path.begin() + i + 1);
                    return value_of(*c, want, enclosing, epath);
                }
                if (skipped_self)
                    fail("reference_cycle", where + "ATTRIB " + want + " only finds itself");
                fail("unresolved_reference",
                     where + "ATTRIB " + want + " is not defined in any enclosing scope");
            }
            case Reference::Kind::Path: {
                Scope walk{scope.front()};
                std::vector<std::string> wpath{path.front()};
                return walk_down(ref.segments, walk, wpath, where + ref.str() + ": ");
            }
            case Reference::Kind::ParentChain: {
                if (static_cast<size_t>(ref.hops) >= scope.size())
                    fail("unresolved_reference", where + ref.str() + ": escapes the tree");
                Scope walk(scope.begin(), scope.end() - ref.hops);
                std::vector<std::string> wpath(path.begin(), path.end() - ref.hops);
                return walk_down(ref.segments, walk, wpath, where + ref.str() + ": ");
            }
        }
        fail("unresolved_reference", where + "unknown reference kind");
    }

    // Follows `segments` through child components starting at the back of
    // `walk`; the final segment may name any entry.
    Value walk_down(const std::vector<std::string>& segments, Scope walk,
                    std::vector<std::string> wpath, const std::string& where) {
        for (size_t i = 0; i + 1 < segments.size(); ++i) {
            Component* cur = walk.back();
            Entry* e = cur->find(segments[i]);
            if (!e) fail("unresolved_reference", where + "no entry '" + segments[i] + "'");
            if (e->value.is_ref()) {
                e->value = resolve_entry(*cur, segments[i], walk, wpath);
            }
            if (!e->value.is_component())
                fail("unresolved_reference",
                     where + "'" + segments[i] + "' is not a component");
            walk.push_back(e->value.as_component().get());
            wpath.push_back(segments[i]);
        }
        return value_of(*walk.back(), segments.back(), walk, wpath);
    }

    // The value of `name` inside `c`, resolving through chained references.
    Value value_of(Component& c, const std::string& name, const Scope& scope,
                   const std::vector<std::string>& path) {
        Entry* e = c.find(name);
        if (!e)
            fail("unresolved_reference", join_path(path) + ": no entry '" + name + "'");
        if (e->value.is_ref() && (!e->value.as_ref().lazy || force_lazy_))
            e->value = resolve_entry(c, name, scope, path);
        if (e->value.is_ref())
            fail("unresolved_reference",
                 join_path(path) + ":" + name + ": target is itself lazy");
        return e->value.clone();
    }

    Component& root_;
    bool force_lazy_;
    std::set<std::pair<Component*, std::string>> in_progress_;
};

}  // namespace detail

// Expands every `extends` in `root` against the prototype table.
inline Component resolve_extends(const Component& root,
                                 const std::map<std::string, const Component*>& prototypes) {
    return detail::Flattener(prototypes).flatten(root, kRootName);
}

// Replaces non-lazy references by their targets, in place.
inline void resolve_references(Component& root) { detail::Resolver(root).run(); }

// Deployment-time pass: lazy references are resolved too.
inline void resolve_lazy_references(Component& root) { detail::Resolver(root, true).run(); }

// Deployment-time binding for a single node: resolves the references sitting
// directly on the node at `path` (child names below the root, lazy included)
// against the live tree.
inline void resolve_lazy_node(Component& root, const std::vector<std::string>& path) {
    detail::Resolver(root, true).resolve_node(path);
}

// Full pipeline for one file (plus optional include documents supplying
// extra prototypes): find the sfConfig root, flatten, resolve.
inline Component resolve_document(const Document& doc, const std::vector<Document>& includes = {}) {
    const Component* root = doc.top(kRootName);
    if (!root)
        fail("missing_root", std::string("no top-level '") + kRootName + "' component");
    std::map<std::string, const Component*> protos;
    for (const auto& inc : includes)
        for (const auto& e : inc.tops)
            if (e.name != kRootName) protos[e.name] = e.value.as_component().get();
    for (const auto& e : doc.tops)
        if (e.name != kRootName) protos[e.name] = e.value.as_component().get();
    Component flat = resolve_extends(*root, protos);
    resolve_references(flat);
    return flat;
}

}  // namespace agora::desc
