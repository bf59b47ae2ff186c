#include "anmvae/mechanism/builtins.hpp"

#include <string>

#include "anmvae/errors.hpp"
#include "anmvae/mechanism/parser.hpp"

namespace anmvae::mech {

std::string_view builtin_source(Builtin b) {
  switch (b) {
    case Builtin::SpringPrior:
      return "cos(t)";
    case Builtin::SpringInt:
      return "(1/3)*cos(2*t) - 2/3";
    case Builtin::PendulumPrior:
      return "cos(t)";
    case Builtin::PendulumInt:
      return "exp(-t/(2*pi))*cos(t)";
    case Builtin::FallPrior:
      return "1 - t^2";
    case Builtin::FallInt:
      return "max(0, 1 - 2.53*t^2)";
    case Builtin::PulsarPrior:
      return "0.125*gausspdf(t; 0.055, 0.05) + 0.085*gausspdf(t; 0.5, 0.08)";
    case Builtin::PulsarInt:
      return "0.0193*gausspdf(t; 0.195, 0.007) + 0.006*gausspdf(t; 0.6, 0.008)";
  }
  throw ConfigError("unknown builtin mechanism");
}

std::string_view builtin_name(Builtin b) {
  switch (b) {
    case Builtin::SpringPrior:
      return "spring_prior";
    case Builtin::SpringInt:
      return "spring_int";
    case Builtin::PendulumPrior:
      return "pendulum_prior";
    case Builtin::PendulumInt:
      return "pendulum_int";
    case Builtin::FallPrior:
      return "fall_prior";
    case Builtin::FallInt:
      return "fall_int";
    case Builtin::PulsarPrior:
      return "pulsar_prior";
    case Builtin::PulsarInt:
      return "pulsar_int";
  }
  throw ConfigError("unknown builtin mechanism");
}

Builtin builtin_from_name(std::string_view name) {
  for (Builtin b : kAllBuiltins) {
    if (builtin_name(b) == name) {
      return b;
    }
  }
  throw ConfigError("unknown builtin mechanism '" + std::string(name) + "'");
}

MechanismExpr builtin(Builtin b) { return parse(builtin_source(b)); }

MechanismExpr builtin(std::string_view name) { return builtin(builtin_from_name(name)); }

}  // namespace anmvae::mech
