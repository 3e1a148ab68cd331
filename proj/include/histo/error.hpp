#ifndef HISTO_ERROR_HPP
#define HISTO_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace histo {

enum class ErrorKind {
  Io,
  Format,
  Channel,
  InsufficientTissue,
  DegenerateWedge,
  ImageTooSmall,
  LengthMismatch,
  UndefinedDistance,
  ZeroMass,
  EmptyTrainingSet,
  HeterogeneousDescriptors,
  KOutOfRange,
  DegenerateQuery,
  EmptyNeighborList,
  Parse,
  EmptyDataset,
  UnknownPatient,
  InfeasibleSplit,
  UndefinedMetric,
  EmptyInput,
  EmptyGroup,
  IncompleteTrial,
  Config,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::Channel: return "ChannelError";
    case ErrorKind::InsufficientTissue: return "InsufficientTissue";
    case ErrorKind::DegenerateWedge: return "DegenerateWedge";
    case ErrorKind::ImageTooSmall: return "ImageTooSmall";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UndefinedDistance: return "UndefinedDistance";
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::HeterogeneousDescriptors: return "HeterogeneousDescriptors";
    case ErrorKind::KOutOfRange: return "KOutOfRange";
    case ErrorKind::DegenerateQuery: return "DegenerateQuery";
    case ErrorKind::EmptyNeighborList: return "EmptyNeighborList";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::UnknownPatient: return "UnknownPatient";
    case ErrorKind::InfeasibleSplit: return "InfeasibleSplit";
    case ErrorKind::UndefinedMetric: return "UndefinedMetric";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::IncompleteTrial: return "IncompleteTrial";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace histo

#endif  // HISTO_ERROR_HPP
