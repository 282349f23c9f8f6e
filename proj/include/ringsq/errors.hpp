#pragma once

#include <stdexcept>
#include <string>

namespace ringsq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct InfeasibleTarget : Error { using Error::Error; };
struct UnphysicalDevice : Error { using Error::Error; };
struct SingularError : Error { using Error::Error; };
struct StepSizeError : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct UndefinedCorrelation : Error { using Error::Error; };

}  // namespace ringsq
