#pragma once

#include <stdexcept>
#include <string>

namespace atelier {

// Precondition or value-range violation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed textual input (manifest lines, filenames, sidecars).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed binary/text embedding store. Carries the byte offset of the failure.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Cross-artifact inconsistency, e.g. a face id with no painting record.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Missing input files or invalid configuration.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace atelier
