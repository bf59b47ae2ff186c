#pragma once

#include <array>
#include <string_view>

#include "anmvae/mechanism/expr.hpp"

namespace anmvae::mech {

enum class Builtin {
  SpringPrior,
  SpringInt,
  PendulumPrior,
  PendulumInt,
  FallPrior,
  FallInt,
  PulsarPrior,
  PulsarInt,
};

inline constexpr std::array<Builtin, 8> kAllBuiltins = {
    Builtin::SpringPrior, Builtin::SpringInt, Builtin::PendulumPrior, Builtin::PendulumInt,
    Builtin::FallPrior,   Builtin::FallInt,   Builtin::PulsarPrior,   Builtin::PulsarInt,
};

/// Source text of the prior and intervention mechanisms of the four scenes.
std::string_view builtin_source(Builtin b);
std::string_view builtin_name(Builtin b);
/// Throws ConfigError for names other than spring_prior, spring_int, ...
Builtin builtin_from_name(std::string_view name);

MechanismExpr builtin(Builtin b);
MechanismExpr builtin(std::string_view name);

}  // namespace anmvae::mech
