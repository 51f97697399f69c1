#include "optlab/session.hpp"

namespace optlab {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Off: return "off";
    case Mode::Naive: return "naive";
    case Mode::Cache: return "cache";
    case Mode::CacheGuess: return "cache-guess";
    case Mode::GuessOnly: return "guess-only";
  }
  return "?";
}

std::optional<Mode> mode_from_name(const std::string& name) {
  if (name == "off") return Mode::Off;
  if (name == "naive") return Mode::Naive;
  if (name == "cache") return Mode::Cache;
  if (name == "cache-guess") return Mode::CacheGuess;
  if (name == "guess-only") return Mode::GuessOnly;
  return std::nullopt;
}

}  // namespace optlab
