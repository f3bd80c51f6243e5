#include "epf/calendar.hpp"

#include "epf/dates.hpp"
#include "epf/errors.hpp"

namespace epf {

int dummy_value(DummyKind kind, int k, long d, int h, int weekday0) {
    if (h < 1 || h > 24) throw DataError("dummy_value: hour outside 1..24");
    const int wd = weekday_after(weekday0, d);
    switch (kind) {
        case DummyKind::HoD:
            return h == k ? 1 : 0;
        case DummyKind::DoW:
            return wd == k ? 1 : 0;
        case DummyKind::HoW:
            return (wd - 1) * 24 + h == k ? 1 : 0;
    }
    return 0;
}

SeasonalMeans fit_means(const Eigen::MatrixXd& Y, int weekday0) {
    const long days = Y.rows();
    if (days < 7 || Y.cols() != 24)
        throw DataError("fit_means: need a D x 24 block covering at least one full week");

    SeasonalMeans m;
    std::array<long, 168> n_how{};
    std::array<long, 7> n_dow{};

    for (long d = 0; d < days; ++d) {
        const int wd = weekday_after(weekday0, d);
        for (int h = 1; h <= 24; ++h) {
            const double y = Y(d, h - 1);
            m.how[(wd - 1) * 24 + (h - 1)] += y;
            m.hod[h - 1] += y;
            m.dow[wd - 1] += y;
        }
        n_how[static_cast<size_t>(wd - 1)] += 1;  // per-weekday day count, shared by all 24 hours
        n_dow[static_cast<size_t>(wd - 1)] += 1;
    }

    for (int w = 0; w < 7; ++w) {
        for (int h = 0; h < 24; ++h) m.how[w * 24 + h] /= static_cast<double>(n_how[w]);
        m.dow[w] /= static_cast<double>(n_dow[w] * 24);
    }
    for (int h = 0; h < 24; ++h) m.hod[h] /= static_cast<double>(days);
    m.overall = Y.sum() / static_cast<double>(Y.size());
    return m;
}

}  // namespace epf
