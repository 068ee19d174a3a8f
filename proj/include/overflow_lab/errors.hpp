#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace overflow_lab {

enum class ErrorClass { domain, numerical };

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message, ErrorClass cls,
          std::optional<long> position = std::nullopt)
        : std::runtime_error(message), kind_(std::move(kind)), cls_(cls), position_(position) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorClass error_class() const noexcept { return cls_; }
    // Character offset for parse errors, coefficient index for certificate failures.
    std::optional<long> position() const noexcept { return position_; }

private:
    std::string kind_;
    ErrorClass cls_;
    std::optional<long> position_;
};

#define OVERFLOW_LAB_DEFINE_ERROR(Name, Cls)                                        \
    class Name : public Error {                                                     \
    public:                                                                         \
        explicit Name(const std::string& message,                                   \
                      std::optional<long> position = std::nullopt)                  \
            : Error(#Name, message, ErrorClass::Cls, position) {}                   \
    };

OVERFLOW_LAB_DEFINE_ERROR(NonzeroConstantTerm, domain)
OVERFLOW_LAB_DEFINE_ERROR(NotInvertible, domain)
OVERFLOW_LAB_DEFINE_ERROR(AllZero, domain)
OVERFLOW_LAB_DEFINE_ERROR(OrderMismatch, domain)
OVERFLOW_LAB_DEFINE_ERROR(CoincidentDivisors, domain)
OVERFLOW_LAB_DEFINE_ERROR(InvalidPoint, domain)
OVERFLOW_LAB_DEFINE_ERROR(InvalidArgument, domain)
OVERFLOW_LAB_DEFINE_ERROR(PoleAtOrigin, domain)
OVERFLOW_LAB_DEFINE_ERROR(PoleOnDisk, domain)
OVERFLOW_LAB_DEFINE_ERROR(ConstantMap, domain)
OVERFLOW_LAB_DEFINE_ERROR(NotPolynomial, domain)
OVERFLOW_LAB_DEFINE_ERROR(DegreeTooLarge, domain)
OVERFLOW_LAB_DEFINE_ERROR(RootConditioning, numerical)
OVERFLOW_LAB_DEFINE_ERROR(NoConvergence, numerical)
OVERFLOW_LAB_DEFINE_ERROR(NotIntegral, domain)
OVERFLOW_LAB_DEFINE_ERROR(NotPseudoconcave, domain)
OVERFLOW_LAB_DEFINE_ERROR(CertificateViolation, domain)
OVERFLOW_LAB_DEFINE_ERROR(NotNegativeDefinite, domain)
OVERFLOW_LAB_DEFINE_ERROR(CandidateNotCNB, domain)
OVERFLOW_LAB_DEFINE_ERROR(DimensionMismatch, domain)
OVERFLOW_LAB_DEFINE_ERROR(LevelMismatch, domain)
OVERFLOW_LAB_DEFINE_ERROR(StepTooSmall, numerical)
OVERFLOW_LAB_DEFINE_ERROR(EnumerationTooLarge, domain)
OVERFLOW_LAB_DEFINE_ERROR(ParseError, domain)
OVERFLOW_LAB_DEFINE_ERROR(ConfigError, domain)

#undef OVERFLOW_LAB_DEFINE_ERROR

}  // namespace overflow_lab
