#include "cdet/time.hpp"

#include <charconv>

#include <fmt/format.h>

#include "cdet/error.hpp"

namespace cdet {
namespace {

using namespace std::chrono;

class Cursor {
public:
    Cursor(std::string_view text, std::string_view whole) : text_(text), whole_(whole) {}

    int digits(std::size_t count) {
        if (text_.size() < count) fail();
        int value = 0;
        auto [ptr, ec] = std::from_chars(text_.data(), text_.data() + count, value);
        if (ec != std::errc{} || ptr != text_.data() + count) fail();
        text_.remove_prefix(count);
        return value;
    }

    void expect(char c) {
        if (text_.empty() || text_.front() != c) fail();
        text_.remove_prefix(1);
    }

    bool accept(char c) {
        if (text_.empty() || text_.front() != c) return false;
        text_.remove_prefix(1);
        return true;
    }

    bool done() const { return text_.empty(); }
    char peek() const { return text_.empty() ? '\0' : text_.front(); }

    [[noreturn]] void fail() const {
        throw Error(Errc::BadTimestamp, fmt::format("cannot parse '{}'", whole_));
    }

private:
    std::string_view text_;
    std::string_view whole_;
};

Date read_date(Cursor& in) {
    int y = in.digits(4);
    in.expect('-');
    int m = in.digits(2);
    in.expect('-');
    int d = in.digits(2);
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) in.fail();
    return sys_days{ymd};
}

} // namespace

Timestamp parse_timestamp(std::string_view text) {
    Cursor in(text, text);
    Date date = read_date(in);
    if (!in.accept('T') && !in.accept(' ')) in.fail();
    int hh = in.digits(2);
    in.expect(':');
    int mm = in.digits(2);
    in.expect(':');
    int ss = in.digits(2);
    if (hh > 23 || mm > 59 || ss > 60) in.fail();
    if (in.accept('.')) {
        bool any = false;
        while (in.peek() >= '0' && in.peek() <= '9') {
            in.digits(1);
            any = true;
        }
        if (!any) in.fail();
    }
    seconds offset{0};
    if (in.accept('Z') || in.accept('z')) {
    } else if (in.peek() == '+' || in.peek() == '-') {
        int sign = in.accept('+') ? 1 : (in.expect('-'), -1);
        int oh = in.digits(2);
        in.accept(':');
        int om = in.digits(2);
        if (oh > 23 || om > 59) in.fail();
        offset = seconds{sign * (oh * 3600 + om * 60)};
    }
    if (!in.done()) in.fail();
    return Timestamp{date} + hours{hh} + minutes{mm} + seconds{ss} - offset;
}

Date parse_date(std::string_view text) {
    Cursor in(text, text);
    Date date = read_date(in);
    if (!in.done()) in.fail();
    return date;
}

std::string format_date(Date d) {
    year_month_day ymd{d};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

std::string format_timestamp(Timestamp t) {
    Date d = day_of(t);
    hh_mm_ss hms{t - d};
    return fmt::format("{}T{:02d}:{:02d}:{:02d}Z", format_date(d), hms.hours().count(),
                       hms.minutes().count(), hms.seconds().count());
}

} // namespace cdet
