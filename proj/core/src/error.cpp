#include "wbrom/error.hpp"

namespace wbrom {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::SizeMismatch: return "size-mismatch";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::CflViolation: return "cfl-violation";
    case ErrorKind::ZeroMass: return "zero-mass";
    case ErrorKind::TooFewSnapshots: return "too-few-snapshots";
    case ErrorKind::NonTensorGrid: return "non-tensor-grid";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace wbrom
