#pragma once

#include <stdexcept>
#include <string>

namespace canlearn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// numerics
struct InvalidMatrix : Error { using Error::Error; };
struct InvalidInput : Error { using Error::Error; };
struct DegenerateProx : Error { using Error::Error; };  // retryable: caller restarts the trial
struct NotADag : Error { using Error::Error; };

// model
struct NotSquare : Error { using Error::Error; };
struct NotPsd : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct StructureMismatch : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// solver / search
struct RankOrderViolation : Error { using Error::Error; };
struct MissingStructure : Error { using Error::Error; };
struct MissingMap : Error { using Error::Error; };
struct DisconnectedTopology : Error { using Error::Error; };

// cli
struct UsageError : Error { using Error::Error; };

}  // namespace canlearn
