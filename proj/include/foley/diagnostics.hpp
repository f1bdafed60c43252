#pragma once

#include <functional>
#include <string_view>

namespace foley {

using WarningSink = std::function<void(std::string_view)>;

// Non-fatal conditions (clipping, gain capping) are reported here. The default
// sink prints to stderr. Returns the previously installed sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

}  // namespace foley
