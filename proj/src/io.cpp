#include "hoptk/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hoptk {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t row, std::size_t col,
                             const std::string& what) {
    std::ostringstream os;
    os << path << ": row " << row << ", column " << col << ": " << what;
    throw std::runtime_error(os.str());
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void write_feature_csv(const std::string& path, const Matrix& X,
                       const std::vector<std::size_t>& labels) {
    if (!labels.empty() && labels.size() != X.rows)
        throw std::invalid_argument("write_feature_csv: label count != row count");
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_feature_csv: cannot open " + path);
    for (std::size_t j = 0; j < X.cols; ++j) {
        if (j) f << ',';
        f << 'f' << j;
    }
    if (!labels.empty()) f << ",label";
    f << '\n';
    for (std::size_t i = 0; i < X.rows; ++i) {
        for (std::size_t j = 0; j < X.cols; ++j) {
            if (j) f << ',';
            f << fmt_double(X(i, j));
        }
        if (!labels.empty()) f << ',' << labels[i];
        f << '\n';
    }
    if (!f) throw std::runtime_error("write_feature_csv: write failed for " + path);
}

FeatureFile read_feature_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_feature_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) parse_fail(path, 0, 0, "empty file");
    std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) parse_fail(path, 0, 0, "empty header");
    const bool labelled = header.back() == "label";
    const std::size_t d = header.size() - (labelled ? 1 : 0);
    if (d == 0) parse_fail(path, 0, 0, "no feature columns");

    FeatureFile out;
    out.feature_names.assign(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(d));
    std::vector<double> values;
    std::size_t row = 0;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            parse_fail(path, row, fields.size(), "expected " + std::to_string(header.size()) +
                                                     " fields, got " + std::to_string(fields.size()));
        for (std::size_t j = 0; j < d; ++j) {
            double v = 0.0;
            const char* b = fields[j].data();
            const char* e = b + fields[j].size();
            const auto res = std::from_chars(b, e, v);
            if (res.ec != std::errc{} || res.ptr != e)
                parse_fail(path, row, j + 1, "not a number: '" + fields[j] + "'");
            if (!std::isfinite(v)) parse_fail(path, row, j + 1, "non-finite feature");
            values.push_back(v);
        }
        if (labelled) {
            unsigned long long lab = 0;
            const char* b = fields[d].data();
            const char* e = b + fields[d].size();
            const auto res = std::from_chars(b, e, lab);
            if (res.ec != std::errc{} || res.ptr != e)
                parse_fail(path, row, d + 1, "not an integer label: '" + fields[d] + "'");
            out.labels.push_back(static_cast<std::size_t>(lab));
        }
    }
    if (row == 0) parse_fail(path, 0, 0, "no data rows");
    out.X = Matrix(row, d);
    out.X.data = std::move(values);
    return out;
}

double idx_pixel_to_feature(unsigned char p) { return static_cast<double>(p) / 127.5 - 1.0; }

namespace {

struct IdxReader {
    std::ifstream f;
    std::string path;
    std::size_t offset = 0;

    explicit IdxReader(const std::string& p) : f(p, std::ios::binary), path(p) {
        if (!f) throw std::runtime_error("read_idx: cannot open " + p);
    }

    [[noreturn]] void fail(const std::string& what) {
        std::ostringstream os;
        os << path << ": byte offset " << offset << ": " << what;
        throw std::runtime_error(os.str());
    }

    std::uint32_t u32_be() {
        unsigned char b[4];
        f.read(reinterpret_cast<char*>(b), 4);
        if (!f) fail("truncated header");
        offset += 4;
        return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
               (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
    }

    void bytes(unsigned char* dst, std::size_t n) {
        f.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(f.gcount()) != n) {
            offset += static_cast<std::size_t>(std::max<std::streamsize>(f.gcount(), 0));
            fail("truncated payload");
        }
        offset += n;
    }
};

}  // namespace

FeatureFile read_idx(const std::string& images_path, const std::string& labels_path) {
    IdxReader img(images_path);
    const std::uint32_t img_magic = img.u32_be();
    if (img_magic != 0x0000'0803u) img.fail("bad image magic (expected 0x00000803)");
    const std::uint32_t n = img.u32_be();
    const std::uint32_t h = img.u32_be();
    const std::uint32_t w = img.u32_be();
    if (h == 0 || w == 0) img.fail("zero image dimensions");

    IdxReader lab(labels_path);
    const std::uint32_t lab_magic = lab.u32_be();
    if (lab_magic != 0x0000'0801u) lab.fail("bad label magic (expected 0x00000801)");
    const std::uint32_t n_lab = lab.u32_be();
    if (n_lab != n)
        throw std::runtime_error("read_idx: image count " + std::to_string(n) +
                                 " != label count " + std::to_string(n_lab));

    const std::size_t d = static_cast<std::size_t>(h) * w;
    FeatureFile out;
    out.X = Matrix(n, d);
    out.feature_names.reserve(d);
    for (std::size_t j = 0; j < d; ++j) out.feature_names.push_back("f" + std::to_string(j));

    std::vector<unsigned char> buf(d);
    for (std::uint32_t i = 0; i < n; ++i) {
        img.bytes(buf.data(), d);
        for (std::size_t j = 0; j < d; ++j) out.X(i, j) = idx_pixel_to_feature(buf[j]);
    }
    out.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        unsigned char b = 0;
        lab.bytes(&b, 1);
        out.labels[i] = b;
    }
    return out;
}

ZScore ZScore::fit(const Matrix& X) {
    if (X.rows == 0) throw std::invalid_argument("ZScore::fit: empty matrix");
    ZScore z;
    z.mean.assign(X.cols, 0.0);
    z.stddev.assign(X.cols, 1.0);
    for (std::size_t j = 0; j < X.cols; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < X.rows; ++i) m += X(i, j);
        m /= static_cast<double>(X.rows);
        double ss = 0.0;
        for (std::size_t i = 0; i < X.rows; ++i) {
            const double dlt = X(i, j) - m;
            ss += dlt * dlt;
        }
        const double sd = std::sqrt(ss / static_cast<double>(X.rows));
        z.mean[j] = m;
        z.stddev[j] = sd > 0.0 ? sd : 1.0;
    }
    return z;
}

Matrix ZScore::apply(const Matrix& X) const {
    if (X.cols != mean.size()) throw std::invalid_argument("ZScore::apply: column mismatch");
    Matrix out(X.rows, X.cols);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j)
            out(i, j) = (X(i, j) - mean[j]) / stddev[j];
    return out;
}

std::string run_record_to_json(const RunRecord& rec, const std::string& condition) {
    nlohmann::ordered_json j;
    j["condition"] = condition;
    j["seed"] = rec.seed;
    j["accuracy"] = rec.accuracy;
    j["H"] = rec.H;
    j["epochs"] = rec.epochs;
    j["config_hash"] = rec.config_hash;
    j["hopkins_skipped_batches"] = rec.hopkins_skipped_batches;
    j["epoch_ms"] = rec.epoch_ms;
    nlohmann::ordered_json log = nlohmann::ordered_json::array();
    for (const EpochLog& e : rec.log) {
        log.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_loss", e.val_loss},
                       {"lr", e.lr},
                       {"duration_ms", e.duration_ms}});
    }
    j["log"] = std::move(log);
    return j.dump();
}

RunRecord run_record_from_json(const std::string& line, std::string* condition) {
    const nlohmann::json j = nlohmann::json::parse(line);
    RunRecord rec;
    if (condition) *condition = j.at("condition").get<std::string>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.accuracy = j.at("accuracy").get<double>();
    rec.H = j.at("H").get<double>();
    rec.epochs = j.at("epochs").get<std::size_t>();
    rec.config_hash = j.at("config_hash").get<std::uint64_t>();
    rec.hopkins_skipped_batches = j.at("hopkins_skipped_batches").get<std::size_t>();
    rec.epoch_ms = j.at("epoch_ms").get<std::vector<double>>();
    for (const auto& e : j.at("log")) {
        EpochLog el;
        el.epoch = e.at("epoch").get<std::size_t>();
        el.train_loss = e.at("train_loss").get<double>();
        el.val_loss = e.at("val_loss").get<double>();
        el.lr = e.at("lr").get<double>();
        el.duration_ms = e.at("duration_ms").get<double>();
        rec.log.push_back(el);
    }
    return rec;
}

void append_line(const std::string& path, const std::string& line) {
    std::ofstream f(path, std::ios::app);
    if (!f) throw std::runtime_error("append_line: cannot open " + path);
    f << line << '\n';
    if (!f) throw std::runtime_error("append_line: write failed for " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_lines: cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace hoptk
