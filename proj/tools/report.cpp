#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "bench.hpp"
#include "screenlab/io.hpp"

namespace screenlab::bench {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

template <typename T>
T parse(const std::string& tok, const std::string& where) {
    T v{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        throw io::FormatError(where + ": cannot parse '" + tok + "'");
    return v;
}

}  // namespace

std::vector<BenchRow> read_bench_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::vector<BenchRow> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (!header) {
            if (line != kBenchHeader) throw io::FormatError(where + ": unexpected header");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 10) throw io::FormatError(where + ": expected 10 fields");
        BenchRow r;
        r.seed = parse<std::uint64_t>(f[0], where);
        r.algo = f[1];
        r.strategy = f[2];
        r.test = f[3];
        r.lambda_ratio = parse<double>(f[4], where);
        r.iters = parse<std::size_t>(f[5], where);
        r.flops = parse<std::uint64_t>(f[6], where);
        r.time_s = parse<double>(f[7], where);
        r.final_obj = parse<double>(f[8], where);
        r.screened_frac = parse<double>(f[9], where);
        if (!parse_strategy(r.strategy)) throw io::FormatError(where + ": unknown strategy");
        rows.push_back(std::move(r));
    }
    if (!header) throw io::FormatError(path.string() + ": missing header");
    return rows;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile: no values");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile: q must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

Summary summarize(const std::vector<double>& values) {
    return Summary{percentile(values, 0.5), percentile(values, 0.25), percentile(values, 0.75)};
}

std::vector<ReportRow> aggregate(const std::vector<BenchRow>& rows) {
    using BaseKey = std::tuple<std::uint64_t, std::string, double, std::size_t>;
    using CellKey = std::tuple<std::string, std::string, std::string, double>;

    // The n-th none run of a (seed, algo, ratio) pairs with the n-th run of
    // every other strategy/test on the same cell.
    std::map<BaseKey, const BenchRow*> base;
    std::map<std::tuple<std::uint64_t, std::string, double>, std::size_t> base_seen;
    for (const auto& r : rows) {
        if (r.strategy != "none") continue;
        const std::size_t occ = base_seen[{r.seed, r.algo, r.lambda_ratio}]++;
        base[{r.seed, r.algo, r.lambda_ratio, occ}] = &r;
    }

    struct Acc {
        std::vector<double> flops, time, screened;
    };
    std::map<CellKey, Acc> cells;
    std::map<std::tuple<std::uint64_t, CellKey>, std::size_t> seen;
    for (const auto& r : rows) {
        const CellKey cell{r.algo, r.strategy, r.test, r.lambda_ratio};
        const std::size_t occ = seen[{r.seed, cell}]++;
        const auto it = base.find({r.seed, r.algo, r.lambda_ratio, occ});
        if (it == base.end())
            throw std::invalid_argument("report: no matching none run for seed " +
                                        std::to_string(r.seed) + ", " + r.algo + ", ratio " +
                                        std::to_string(r.lambda_ratio));
        const BenchRow& b = *it->second;
        auto& acc = cells[cell];
        acc.flops.push_back(b.flops > 0 ? static_cast<double>(r.flops) / static_cast<double>(b.flops)
                                        : 1.0);
        acc.time.push_back(b.time_s > 0.0 ? r.time_s / b.time_s : 1.0);
        acc.screened.push_back(r.screened_frac);
    }

    std::vector<ReportRow> out;
    for (const auto& [key, acc] : cells) {
        ReportRow row;
        std::tie(row.algo, row.strategy, row.test, row.lambda_ratio) = key;
        row.count = acc.flops.size();
        row.flops = summarize(acc.flops);
        row.time = summarize(acc.time);
        row.screened_frac = summarize(acc.screened);
        out.push_back(std::move(row));
    }
    return out;
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows,
                      const std::string& config) {
    if (!config.empty()) os << "# " << config << '\n';
    os << "algo,strategy,test,lambda_ratio,count,flops_median,flops_p25,flops_p75,"
          "time_median,time_p25,time_p75,screened_median,screened_p25,screened_p75\n";
    os << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.algo << ',' << r.strategy << ',' << r.test << ',' << r.lambda_ratio << ','
           << r.count << ',' << r.flops.median << ',' << r.flops.p25 << ',' << r.flops.p75
           << ',' << r.time.median << ',' << r.time.p25 << ',' << r.time.p75 << ','
           << r.screened_frac.median << ',' << r.screened_frac.p25 << ','
           << r.screened_frac.p75 << '\n';
    }
}

void write_svg(std::ostream& os, const std::vector<ReportRow>& rows, const std::string& title) {
    constexpr double kW = 640, kH = 400, kL = 60, kR = 170, kT = 40, kB = 50;
    constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                        "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    std::map<std::string, std::vector<const ReportRow*>> series;
    double ymax = 1.1;
    for (const auto& r : rows) {
        series[r.algo + " " + r.strategy + (r.test == "-" ? "" : " " + r.test)].push_back(&r);
        ymax = std::max(ymax, r.flops.p75 * 1.05);
    }
    const auto sx = [&](double x) { return kL + x * (kW - kL - kR); };
    const auto sy = [&](double y) { return kH - kB - y / ymax * (kH - kT - kB); };

    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
       << "</text>\n";
    os << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(1) << "\" y2=\""
       << sy(0) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(0) << "\" y2=\""
       << sy(ymax) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 10; i += 2) {
        const double x = i / 10.0;
        os << "<text x=\"" << sx(x) << "\" y=\"" << sy(0) + 15 << "\" text-anchor=\"middle\">"
           << std::setprecision(1) << x << std::setprecision(2) << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double y = ymax * i / 5.0;
        os << "<text x=\"" << sx(0) - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">" << y
           << "</text>\n";
        os << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(y) << "\" x2=\"" << sx(1) << "\" y2=\""
           << sy(y) << "\" stroke=\"#ddd\"/>\n";
    }
    os << "<text x=\"" << sx(0.5) << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">"
       << "lambda / lambda*</text>\n";
    os << "<text transform=\"translate(16," << sy(ymax / 2) << ") rotate(-90)\" "
       << "text-anchor=\"middle\">normalized flops</text>\n";

    std::size_t idx = 0;
    for (auto& [name, pts] : series) {
        std::sort(pts.begin(), pts.end(), [](const ReportRow* a, const ReportRow* b) {
            return a->lambda_ratio < b->lambda_ratio;
        });
        const char* color = kPalette[idx % std::size(kPalette)];
        os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (const auto* p : pts) os << sx(p->lambda_ratio) << ',' << sy(p->flops.p75) << ' ';
        for (auto it = pts.rbegin(); it != pts.rend(); ++it)
            os << sx((*it)->lambda_ratio) << ',' << sy((*it)->flops.p25) << ' ';
        os << "\"/>\n";
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto* p : pts) os << sx(p->lambda_ratio) << ',' << sy(p->flops.median) << ' ';
        os << "\"/>\n";
        const double ly = kT + 16.0 * static_cast<double>(idx);
        os << "<line x1=\"" << kW - kR + 10 << "\" y1=\"" << ly << "\" x2=\"" << kW - kR + 30
           << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << kW - kR + 36 << "\" y=\"" << ly + 4 << "\">" << name << "</text>\n";
        ++idx;
    }
    os << "</svg>\n";
}

}  // namespace screenlab::bench
