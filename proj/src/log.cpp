#include "skewmorph/log.hpp"

#include <iostream>

namespace skewmorph {
namespace {

WarningSink& sink() {
    static WarningSink s;
    return s;
}

}  // namespace

void set_warning_sink(WarningSink s) {
    sink() = std::move(s);
}

void warn(std::string_view message) {
    if (sink()) {
        sink()(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

}  // namespace skewmorph
