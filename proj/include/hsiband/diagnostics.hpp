#ifndef HSIBAND_DIAGNOSTICS_HPP
#define HSIBAND_DIAGNOSTICS_HPP

#include <functional>
#include <iostream>
#include <string>
#include <string_view>
#include <utility>

namespace hsiband {

using warning_handler = std::function<void(std::string_view)>;

namespace detail {
inline warning_handler& current_warning_handler() {
    static warning_handler handler = [](std::string_view msg) {
        std::clog << "warning: " << msg << '\n';
    };
    return handler;
}
}  // namespace detail

/// Installs a new handler for non-fatal conditions and returns the old one.
inline warning_handler set_warning_handler(warning_handler handler) {
    return std::exchange(detail::current_warning_handler(), std::move(handler));
}

inline void warn(std::string_view msg) {
    auto& handler = detail::current_warning_handler();
    if (handler) handler(msg);
}

/// Restores the previous handler on scope exit.
class scoped_warning_handler {
public:
    explicit scoped_warning_handler(warning_handler handler)
        : previous_(set_warning_handler(std::move(handler))) {}
    ~scoped_warning_handler() { set_warning_handler(std::move(previous_)); }
    scoped_warning_handler(const scoped_warning_handler&) = delete;
    scoped_warning_handler& operator=(const scoped_warning_handler&) = delete;

private:
    warning_handler previous_;
};

}  // namespace hsiband

#endif  // HSIBAND_DIAGNOSTICS_HPP
