#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace recipemem {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Injected wherever records are stamped, so tests can pin time.
using Clock = std::function<Timestamp()>;

Timestamp now_utc();
Clock system_clock();
Clock fixed_clock(Timestamp at);

// "2024-03-01T09:30:00.250Z"
std::string format_timestamp(Timestamp ts);
Timestamp parse_timestamp(std::string_view text);

}  // namespace recipemem
