#pragma once

#include <stdexcept>
#include <string>

namespace iwa {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define IWA_DEFINE_ERROR(Name)                                             \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name, what) {}     \
    };

IWA_DEFINE_ERROR(DomainError)
IWA_DEFINE_ERROR(PrecisionExhausted)
IWA_DEFINE_ERROR(NotABasis)
IWA_DEFINE_ERROR(NotInSubgroup)
IWA_DEFINE_ERROR(NotPowerful)
IWA_DEFINE_ERROR(NotSplit)
IWA_DEFINE_ERROR(CapTooSmall)
IWA_DEFINE_ERROR(TruncationTooSmall)
IWA_DEFINE_ERROR(NotNormal)
IWA_DEFINE_ERROR(IndexInfinite)
IWA_DEFINE_ERROR(ActionShapeError)
IWA_DEFINE_ERROR(WindowOverflow)
IWA_DEFINE_ERROR(EigenvalueFieldTooSmall)
IWA_DEFINE_ERROR(NotCommuting)
IWA_DEFINE_ERROR(InstanceInvalid)
IWA_DEFINE_ERROR(ParseError)

#undef IWA_DEFINE_ERROR

}  // namespace iwa
