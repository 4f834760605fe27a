#pragma once

#include <functional>
#include <string_view>

namespace skewmorph {

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the warning destination; an empty sink restores stderr.
void set_warning_sink(WarningSink sink);

void warn(std::string_view message);

}  // namespace skewmorph
