#pragma once

#include <stdexcept>
#include <string>

namespace sparseid {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// grid / field
struct NonTilingMesh : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };
struct FormatViolation : Error { using Error::Error; };

// pde solver
struct CoverageGap : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct SolveFailure : Error { using Error::Error; };
struct OutsideDomain : Error { using Error::Error; };

// optimizers
struct StepSizeViolation : Error { using Error::Error; };
struct RelaxationViolation : Error { using Error::Error; };
struct NonFiniteIterate : Error { using Error::Error; };
struct UnsupportedConfig : Error { using Error::Error; };

// enhancement
struct EmptyField : Error { using Error::Error; };
struct NoMaxima : Error { using Error::Error; };
struct SingularGram : Error { using Error::Error; };

// experiments / cli
struct UnknownCase : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SemanticError : Error { using Error::Error; };

}  // namespace sparseid
