#pragma once

#include <functional>
#include <string_view>

namespace brwlab {

using WarningSink = std::function<void(std::string_view)>;

/// Reports a non-fatal condition. Goes to stderr unless a sink is installed.
void warn(std::string_view message);

/// Installs `sink` (empty restores stderr); returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace brwlab
