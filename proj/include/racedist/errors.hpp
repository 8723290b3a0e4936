#ifndef racedist_errors_hpp
#define racedist_errors_hpp

#include <cstddef>
#include <stdexcept>
#include <string>

namespace racedist {

// Base for every error the library reports. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated precondition on an argument (bad sizes, zero scale, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class AmbiguousBase : public Error {
public:
    AmbiguousBase(std::size_t position, char base)
        : Error("ambiguous base '" + std::string(1, base) + "' at position " + std::to_string(position)),
          position(position), base(base) {}

    std::size_t position;
    char base;
};

class NegativeDelay : public Error {
public:
    explicit NegativeDelay(std::string name)
        : Error("encoded " + name + " penalty is negative"), name(std::move(name)) {}

    std::string name;
};

class MatchNotMinimum : public Error {
public:
    MatchNotMinimum() : Error("match penalty must not exceed mismatch, insert or delete") {}
};

class BandTooNarrow : public Error {
public:
    using Error::Error;
};

class ZeroBound : public Error {
public:
    ZeroBound() : Error("counter width undefined: cycle bound is zero") {}
};

class ReferenceTooShort : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class Incomplete : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace racedist

#endif
