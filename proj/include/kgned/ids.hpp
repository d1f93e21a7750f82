#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>

#include "kgned/errors.hpp"

namespace kgned {

namespace detail {

inline bool has_whitespace(std::string_view s) {
    for (unsigned char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return true;
    }
    return false;
}

template <class Tag>
class OpaqueId {
public:
    OpaqueId() = default;
    explicit OpaqueId(std::string value) : value_(std::move(value)) {
        if (value_.empty()) throw InputError(std::string(Tag::kind) + " must not be empty");
        if (has_whitespace(value_))
            throw InputError(std::string(Tag::kind) + " contains whitespace: '" + value_ + "'");
    }

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const OpaqueId&, const OpaqueId&) = default;
    friend bool operator==(const OpaqueId&, const OpaqueId&) = default;

private:
    std::string value_;
};

struct EntityTag { static constexpr const char* kind = "entity id"; };
struct RelationTag { static constexpr const char* kind = "relation id"; };

}  // namespace detail

/// KG vertex identifier, e.g. "Q1967298". Byte-exact comparison.
using EntityId = detail::OpaqueId<detail::EntityTag>;
/// KG edge label identifier, e.g. "P31" or "schema:description".
using RelationId = detail::OpaqueId<detail::RelationTag>;

}  // namespace kgned

template <class Tag>
struct std::hash<kgned::detail::OpaqueId<Tag>> {
    std::size_t operator()(const kgned::detail::OpaqueId<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
