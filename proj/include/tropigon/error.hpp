#pragma once

#include <stdexcept>
#include <string>

namespace tropigon {

// Library-wide error type. `kind` separates caller mistakes
// (Precondition, Parse) from violated internal invariants (Internal),
// which always indicate a bug or an input outside a theorem's hypotheses.
class Error : public std::runtime_error {
 public:
  enum class Kind { Precondition, Structure, Parse, Internal };

  Error(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

[[noreturn]] inline void fail_pre(const std::string& msg) {
  throw Error(Error::Kind::Precondition, msg);
}
[[noreturn]] inline void fail_structure(const std::string& msg) {
  throw Error(Error::Kind::Structure, msg);
}
[[noreturn]] inline void fail_parse(const std::string& msg) {
  throw Error(Error::Kind::Parse, msg);
}
[[noreturn]] inline void fail_internal(const std::string& msg) {
  throw Error(Error::Kind::Internal, msg);
}

}  // namespace tropigon
