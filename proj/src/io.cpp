#include "edgecov/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edgecov::io {

const std::string& version() {
    static const std::string v = "0.1.0";
    return v;
}

namespace {

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (const char ch : line) {
        if (ch == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    out.push_back(cell);
    return out;
}

bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* begin = cell.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

} // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open file for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move " + tmp + " into place at " + path);
}

void write_matrix_csv(const std::string& path, const Matrix& m, const std::string& col_prefix) {
    std::string out;
    out.reserve(static_cast<std::size_t>(m.size()) * 20 + 64);
    for (int j = 0; j < m.cols(); ++j) {
        if (j) out += ',';
        out += col_prefix + std::to_string(j);
    }
    out += '\n';
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += fmt_double(m(i, j));
        }
        out += '\n';
    }
    write_text_atomic(path, out);
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    const int cols = static_cast<int>(split_csv_line(line).size());

    std::vector<double> values;
    int rows = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != cols)
            throw std::runtime_error(path + " line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(cols) + " fields, got " +
                                     std::to_string(cells.size()));
        for (const std::string& cell : cells) {
            double x;
            if (!parse_double(cell, x))
                throw std::runtime_error(path + " line " + std::to_string(lineno) +
                                         ": cannot parse '" + cell + "' as a number");
            values.push_back(x);
        }
        ++rows;
    }
    if (rows == 0) throw std::runtime_error(path + ": no data rows");
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i) * cols + j];
    return m;
}

FeatureTable read_feature_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    FeatureTable table;
    table.columns = split_csv_line(line);
    const int cols = static_cast<int>(table.columns.size());

    std::vector<double> values;
    std::vector<double> row(cols);
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        bool ok = static_cast<int>(cells.size()) == cols;
        for (int j = 0; ok && j < cols; ++j) ok = parse_double(cells[j], row[j]);
        if (!ok) {
            ++table.rejected_rows;
            continue;
        }
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) throw std::runtime_error(path + ": no usable data rows");
    table.x.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            table.x(i, j) = values[static_cast<std::size_t>(i) * cols + j];
    return table;
}

void save_json(const std::string& path, const json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& ex) {
        throw std::runtime_error(path + ": " + ex.what());
    }
    return j;
}

json partition_json(const Partition& p) {
    return json{{"labels", p.labels}, {"kmax", p.kmax}};
}

Partition partition_from_json(const json& j) {
    return Partition::from_labels(j.at("labels").get<std::vector<int>>(), j.at("kmax").get<int>());
}

json rho_json(const RhoParams& rho) {
    return json{{"values", rho.values}};
}

RhoParams rho_from_json(const json& j) {
    return RhoParams::of(j.at("values").get<std::vector<double>>());
}

json ground_truth_json(const simgen::GroundTruth& gt) {
    return json{{"v", gt.v},
                {"group_sizes", gt.group_sizes},
                {"partition", partition_json(gt.partition)},
                {"rho", rho_json(gt.rho)},
                {"lambda", gt.lambda},
                {"map", covariance::to_string(gt.map)},
                {"arrangement", simgen::to_string(gt.arrangement)}};
}

simgen::GroundTruth ground_truth_from_json(const json& j) {
    simgen::GroundTruth gt;
    gt.v = j.at("v").get<int>();
    gt.group_sizes = j.at("group_sizes").get<std::vector<int>>();
    gt.partition = partition_from_json(j.at("partition"));
    gt.rho = rho_from_json(j.at("rho"));
    gt.lambda = j.at("lambda").get<double>();
    gt.map = covariance::entry_map_from_string(j.at("map").get<std::string>());
    gt.arrangement = simgen::arrangement_from_string(j.at("arrangement").get<std::string>());
    if (gt.partition.v() != gt.v)
        throw std::runtime_error("ground truth labels disagree with the node count");
    return gt;
}

namespace {

struct Rgb {
    unsigned char r, g, b;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    auto mix = [t](unsigned char x, unsigned char y) {
        return static_cast<unsigned char>(std::lround(x + t * (y - x)));
    };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

Rgb ramp(const std::vector<Rgb>& anchors, double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * (anchors.size() - 1);
    const int lo = std::min(static_cast<int>(pos), static_cast<int>(anchors.size()) - 2);
    return lerp(anchors[lo], anchors[lo + 1], pos - lo);
}

void write_ppm(const std::string& path, int w, int h, const std::vector<Rgb>& pix) {
    std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    out.reserve(out.size() + pix.size() * 3);
    for (const Rgb& p : pix) {
        out += static_cast<char>(p.r);
        out += static_cast<char>(p.g);
        out += static_cast<char>(p.b);
    }
    write_text_atomic(path, out);
}

void write_matrix_ppm(const std::string& path, const Matrix& m, double lo, double hi,
                      const std::vector<Rgb>& anchors) {
    const int n = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    if (n == 0 || cols == 0) throw std::invalid_argument("empty matrix");
    const int cell = std::max(1, 480 / std::max(n, cols));
    const int w = cols * cell;
    const int h = n * cell;
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<Rgb> pix(static_cast<std::size_t>(w) * h);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < cols; ++j) {
            const Rgb c = ramp(anchors, (m(i, j) - lo) / span);
            for (int y = i * cell; y < (i + 1) * cell; ++y)
                for (int x = j * cell; x < (j + 1) * cell; ++x)
                    pix[static_cast<std::size_t>(y) * w + x] = c;
        }
    }
    write_ppm(path, w, h, pix);
}

} // namespace

void write_heatmap_ppm(const std::string& path, const Matrix& m) {
    static const std::vector<Rgb> anchors = {
        {13, 8, 60}, {84, 39, 143}, {188, 80, 80}, {244, 168, 60}, {252, 253, 191}};
    write_matrix_ppm(path, m, m.minCoeff(), m.maxCoeff(), anchors);
}

void write_diff_heatmap_ppm(const std::string& path, const Matrix& m) {
    static const std::vector<Rgb> anchors = {
        {33, 68, 160}, {130, 165, 220}, {247, 247, 247}, {225, 130, 110}, {165, 15, 21}};
    const double a = std::max(std::abs(m.minCoeff()), std::abs(m.maxCoeff()));
    const double span = a > 0.0 ? a : 1.0;
    write_matrix_ppm(path, m, -span, span, anchors);
}

void write_trace_ppm(const std::string& path, const std::vector<double>& series, int width,
                     int height) {
    if (series.empty()) throw std::invalid_argument("empty series");
    if (width < 16 || height < 16) throw std::invalid_argument("canvas too small");
    std::vector<Rgb> pix(static_cast<std::size_t>(width) * height, {255, 255, 255});
    double lo = series[0], hi = series[0];
    for (const double x : series) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const int mx = 8, my = 8;
    const int iw = width - 2 * mx, ih = height - 2 * my;
    const Rgb ink{40, 60, 130};
    auto ycoord = [&](double val) {
        const double t = (val - lo) / span;
        return my + static_cast<int>(std::lround((1.0 - t) * (ih - 1)));
    };
    auto put = [&](int x, int y) {
        if (x >= 0 && x < width && y >= 0 && y < height)
            pix[static_cast<std::size_t>(y) * width + x] = ink;
    };
    const int n = static_cast<int>(series.size());
    int prev_y = ycoord(series[0]);
    for (int x = 0; x < iw; ++x) {
        const int idx = n == 1 ? 0 : static_cast<int>(std::lround(
                                         static_cast<double>(x) * (n - 1) / (iw - 1)));
        const int y = ycoord(series[idx]);
        const int step = y > prev_y ? 1 : -1;
        for (int yy = prev_y; yy != y; yy += step) put(mx + x, yy);
        put(mx + x, y);
        prev_y = y;
    }
    write_ppm(path, width, height, pix);
}

} // namespace edgecov::io
