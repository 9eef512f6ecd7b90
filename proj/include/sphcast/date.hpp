/*
* Copyright (C) 2026 sphcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef SPHCAST_DATE_HPP
#define SPHCAST_DATE_HPP

#include "sphcast/common.hpp"

#include <compare>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace sphcast {

/// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
/// Conversions use the classic civil-calendar algorithms so arithmetic is
/// exact and branch-free across the whole usable range.
class Date {
public:
    Date() = default;
    explicit Date(long days) : days_(days) {}

    static Date from_ymd(int y, unsigned m, unsigned d) {
        y -= m <= 2;
        const long era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return Date(era * 146097 + static_cast<long>(doe) - 719468);
    }

    struct Ymd {
        int year;
        unsigned month;
        unsigned day;
    };

    Ymd ymd() const {
        long z = days_ + 719468;
        const long era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const long y = static_cast<long>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp + (mp < 10 ? 3 : -9);
        return {static_cast<int>(y + (m <= 2)), m, d};
    }

    /// Parses strict ISO-8601 `YYYY-MM-DD`.
    static Date parse(const std::string& s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-')
            throw ValidationError("bad date '" + s + "': expected YYYY-MM-DD");
        for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
            if (s[i] < '0' || s[i] > '9')
                throw ValidationError("bad date '" + s + "': expected YYYY-MM-DD");
        int y = std::atoi(s.substr(0, 4).c_str());
        unsigned m = static_cast<unsigned>(std::atoi(s.substr(5, 2).c_str()));
        unsigned d = static_cast<unsigned>(std::atoi(s.substr(8, 2).c_str()));
        if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
            throw ValidationError("bad date '" + s + "': out of range");
        return from_ymd(y, m, d);
    }

    std::string str() const {
        auto [y, m, d] = ymd();
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
        return buf;
    }

    long days() const { return days_; }

    Date operator+(long n) const { return Date(days_ + n); }
    Date operator-(long n) const { return Date(days_ - n); }
    long operator-(Date other) const { return days_ - other.days_; }
    Date& operator++() { ++days_; return *this; }
    auto operator<=>(const Date&) const = default;

    /// Shifts by whole calendar months, clamping the day-of-month to the
    /// target month's length (2021-05-31 minus 15 months -> 2020-02-29).
    Date add_months(int months) const {
        auto [y, m, d] = ymd();
        long total = static_cast<long>(y) * 12 + static_cast<long>(m) - 1 + months;
        int ny = static_cast<int>(total >= 0 ? total / 12 : (total - 11) / 12);
        unsigned nm = static_cast<unsigned>(total - static_cast<long>(ny) * 12) + 1;
        unsigned nd = d;
        unsigned cap = days_in_month(ny, nm);
        if (nd > cap) nd = cap;
        return from_ymd(ny, nm, nd);
    }

    static unsigned days_in_month(int y, unsigned m) {
        static constexpr unsigned len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) return 29;
        return len[m - 1];
    }

private:
    long days_ = 0;
};

} // namespace sphcast

#endif
