#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace kgrat {

// Dense handle into an interned label table. The tag keeps entity and
// relation ids from being mixed up.
template <typename Tag>
class StrongId {
 public:
  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t value) : value_(value) {}

  constexpr std::uint32_t value() const { return value_; }

  friend constexpr bool operator==(StrongId, StrongId) = default;
  friend constexpr auto operator<=>(StrongId, StrongId) = default;

 private:
  std::uint32_t value_ = 0;
};

using EntityId = StrongId<struct EntityTag>;
using RelationId = StrongId<struct RelationTag>;

}  // namespace kgrat

template <typename Tag>
struct std::hash<kgrat::StrongId<Tag>> {
  std::size_t operator()(kgrat::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value());
  }
};
