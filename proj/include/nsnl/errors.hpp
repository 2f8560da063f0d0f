#pragma once

#include <stdexcept>
#include <string>

namespace nsnl {

// Base of every error the library throws. The three intermediate classes map
// onto CLI exit codes: ConfigError -> 2, GuardError -> 3. FormatError is an
// input problem and is reported like a config error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GuardError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

#define NSNL_DEFINE_ERROR(Name, Base)              \
  class Name : public Base {                       \
   public:                                         \
    explicit Name(const std::string& what)         \
        : Base(std::string(#Name ": ") + what) {}  \
  };

// grid-core
NSNL_DEFINE_ERROR(NonPowerOfTwo, ConfigError)
NSNL_DEFINE_ERROR(NonPositiveLength, ConfigError)
NSNL_DEFINE_ERROR(UnsupportedDimension, ConfigError)

// wavefield
NSNL_DEFINE_ERROR(UnresolvedWidth, ConfigError)
NSNL_DEFINE_ERROR(TailOverflow, ConfigError)
NSNL_DEFINE_ERROR(NonPositiveMass, ConfigError)
NSNL_DEFINE_ERROR(AllNodes, Error)

// dynamics / oracle
NSNL_DEFINE_ERROR(StabilityGuardTripped, GuardError)
NSNL_DEFINE_ERROR(NormDriftAbort, GuardError)
NSNL_DEFINE_ERROR(TooManyNodes, GuardError)
NSNL_DEFINE_ERROR(SigmaUnderflow, GuardError)

// verify / experiments
NSNL_DEFINE_ERROR(BranchOverlap, GuardError)
NSNL_DEFINE_ERROR(NotProductState, ConfigError)

// cli-io
NSNL_DEFINE_ERROR(ValidationError, ConfigError)
NSNL_DEFINE_ERROR(UnknownKey, ConfigError)
NSNL_DEFINE_ERROR(BadMagic, FormatError)
NSNL_DEFINE_ERROR(VersionMismatch, FormatError)
NSNL_DEFINE_ERROR(TruncatedPayload, FormatError)
NSNL_DEFINE_ERROR(ChecksumMismatch, FormatError)
NSNL_DEFINE_ERROR(OutputLocked, Error)
NSNL_DEFINE_ERROR(IoError, Error)

#undef NSNL_DEFINE_ERROR

class ParseError : public ConfigError {
 public:
  ParseError(int line, const std::string& what)
      : ConfigError("ParseError(line " + std::to_string(line) + "): " + what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace nsnl
