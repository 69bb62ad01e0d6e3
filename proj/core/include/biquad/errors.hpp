#pragma once

#include <stdexcept>
#include <string>

namespace biquad {

// Error families map onto CLI exit codes: invalid input 2, degenerate
// geometry 3, numerical failure or exhausted budget 4.
enum class ErrorKind { InvalidInput = 2, Degenerate = 3, Numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

private:
    ErrorKind kind_;
    std::string name_;
};

inline Error invalid(const std::string& name, const std::string& what = "")
{
    return Error(ErrorKind::InvalidInput, name, what);
}
inline Error degenerate(const std::string& name, const std::string& what = "")
{
    return Error(ErrorKind::Degenerate, name, what);
}
inline Error numerical(const std::string& name, const std::string& what = "")
{
    return Error(ErrorKind::Numerical, name, what);
}

} // namespace biquad
