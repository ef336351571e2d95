#ifndef HSIBAND_ERRORS_HPP
#define HSIBAND_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hsiband {

/// Raw file size or array shape disagrees with the declared dimensions.
class dimension_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed content in an otherwise readable file.
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the documented range.
class parameter_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mathematical precondition violated (empty histogram, single class, ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace hsiband

#endif  // HSIBAND_ERRORS_HPP
