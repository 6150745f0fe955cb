#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace uhedge {

/// Failure raised by any module. `module()` names the subsystem that
/// rejected the input so the CLI can report it with context.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

    [[nodiscard]] const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

}  // namespace uhedge
