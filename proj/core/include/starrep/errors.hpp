#pragma once

#include <stdexcept>
#include <string>

namespace starrep {

// Base class for every error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A product of windowed integers escaped the admissible window.
struct WindowOverflow : Error {
  using Error::Error;
};

// A neighborhood / approximation level finer than the instance can resolve.
struct ResolutionExceeded : Error {
  using Error::Error;
};

// A sampled limit failed Cauchy detection; a genuine choice of accumulation
// point would be required to continue, so we refuse to pick one silently.
struct NonConvergent : Error {
  using Error::Error;
};

// A sort label (or a required product sort) is absent from the structure.
struct MissingSort : Error {
  using Error::Error;
};

// No admissible factorization exists when building a cover at a level.
struct UncoverableAtResolution : Error {
  using Error::Error;
};

// Reconstruction could not produce an intertwiner within tolerance.
struct ReconstructionMismatch : Error {
  using Error::Error;
};

// An operation was handed input that violates its stated preconditions.
struct PreconditionViolation : Error {
  using Error::Error;
};

// Session configuration is malformed or references unknown objects.
struct ConfigError : Error {
  using Error::Error;
};

// Sentence text failed to lex, parse, or sort-check; message carries the position.
struct ParseError : Error {
  using Error::Error;
};

// Two objects that must share a parent (group, dimension) do not.
struct MismatchError : Error {
  using Error::Error;
};

}  // namespace starrep
