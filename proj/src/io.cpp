#include "qtc/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qtc {

namespace fs = std::filesystem;

namespace {

constexpr char kTensorMagic[5] = {'Q', 'T', 'E', 'N', '1'};
constexpr char kMaskMagic[5] = {'Q', 'M', 'S', 'K', '1'};

[[noreturn]] void io_fail(const fs::path& p, const std::string& what) {
    throw std::runtime_error(p.string() + ": " + what);
}

template <class T>
void put_le(std::string& out, T v) {
    std::uint64_t bits;
    if constexpr (sizeof(T) == 8 && std::is_floating_point_v<T>)
        bits = std::bit_cast<std::uint64_t>(v);
    else
        bits = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos, const fs::path& p) {
    if (pos + 8 > in.size()) io_fail(p, "truncated file");
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
    pos += 8;
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) io_fail(p, "cannot open for reading");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) io_fail(p, "cannot open for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) io_fail(p, "write failed");
}

std::string header(const char (&magic)[5], const Dims& dims) {
    std::string out(magic, 5);
    put_le(out, static_cast<std::uint64_t>(dims.size()));
    for (Index d : dims) put_le(out, static_cast<std::uint64_t>(d));
    return out;
}

Dims read_header(const std::string& in, std::size_t& pos, const char (&magic)[5], const fs::path& p) {
    if (in.size() < 5 || std::memcmp(in.data(), magic, 5) != 0)
        io_fail(p, std::string("bad magic, expected ") + std::string(magic, 5));
    pos = 5;
    const std::uint64_t k = get_u64(in, pos, p);
    if (k == 0 || k > 16) io_fail(p, "implausible mode count " + std::to_string(k));
    Dims dims;
    for (std::uint64_t i = 0; i < k; ++i) {
        const std::uint64_t d = get_u64(in, pos, p);
        if (d == 0 || d > (std::uint64_t{1} << 40)) io_fail(p, "implausible dimension " + std::to_string(d));
        dims.push_back(static_cast<Index>(d));
    }
    return dims;
}

}  // namespace

void write_qtensor(const fs::path& path, const QTensor& t) {
    std::string out = header(kTensorMagic, t.dims());
    out.reserve(out.size() + static_cast<std::size_t>(32 * t.numel()));
    for (int c = 0; c < 4; ++c)
        for (Index i = 0; i < t.numel(); ++i) put_le(out, t.part(c)(i));
    spit(path, out);
}

QTensor read_qtensor(const fs::path& path) {
    const std::string in = slurp(path);
    std::size_t pos = 0;
    const Dims dims = read_header(in, pos, kTensorMagic, path);
    QTensor t(dims);
    const std::size_t need = 32 * static_cast<std::size_t>(t.numel());
    if (in.size() - pos != need)
        io_fail(path, "payload is " + std::to_string(in.size() - pos) + " bytes, expected " + std::to_string(need));
    for (int c = 0; c < 4; ++c)
        for (Index i = 0; i < t.numel(); ++i) t.part(c)(i) = std::bit_cast<double>(get_u64(in, pos, path));
    return t;
}

void write_mask(const fs::path& path, const ObsMask& m) {
    std::string out = header(kMaskMagic, m.dims());
    for (std::uint8_t b : m.data()) out.push_back(static_cast<char>(b ? 1 : 0));
    spit(path, out);
}

ObsMask read_mask(const fs::path& path) {
    const std::string in = slurp(path);
    std::size_t pos = 0;
    const Dims dims = read_header(in, pos, kMaskMagic, path);
    const auto n = static_cast<std::size_t>(dims_numel(dims));
    if (in.size() - pos != n)
        io_fail(path, "payload is " + std::to_string(in.size() - pos) + " bytes, expected " + std::to_string(n));
    std::vector<std::uint8_t> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto b = static_cast<unsigned char>(in[pos + i]);
        if (b > 1) io_fail(path, "mask byte " + std::to_string(i) + " is neither 0 nor 1");
        v[i] = b;
    }
    return ObsMask(dims, std::move(v));
}

unsigned char to_byte(double v) {
    if (std::isnan(v)) return 0;
    return static_cast<unsigned char>(std::round(std::clamp(v, 0.0, 255.0)));
}

QTensor load_frames(const fs::path& dir) {
    if (!fs::is_directory(dir)) io_fail(dir, "not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (e.is_regular_file() && ext == ".png") files.push_back(e.path());
    }
    if (files.empty()) io_fail(dir, "no .png frames");
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });

    QTensor t;
    Index rows = 0, cols = 0;
    for (std::size_t f = 0; f < files.size(); ++f) {
        png_image img;
        std::memset(&img, 0, sizeof img);
        img.version = PNG_IMAGE_VERSION;
        if (!png_image_begin_read_from_file(&img, files[f].c_str())) io_fail(files[f], img.message);
        img.format = PNG_FORMAT_RGB;
        std::vector<unsigned char> buf(PNG_IMAGE_SIZE(img));
        if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
            const std::string msg = img.message;
            png_image_free(&img);
            io_fail(files[f], msg);
        }
        const auto h = static_cast<Index>(img.height), w = static_cast<Index>(img.width);
        if (f == 0) {
            rows = h;
            cols = w;
            t = QTensor({rows, cols, static_cast<Index>(files.size())});
        } else if (h != rows || w != cols) {
            io_fail(files[f], "size " + std::to_string(h) + "x" + std::to_string(w) + " differs from " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
        }
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) {
                const unsigned char* px = &buf[static_cast<std::size_t>(3 * (i * cols + j))];
                t.set(i + rows * (j + cols * static_cast<Index>(f)), Quat{0.0, double(px[0]), double(px[1]), double(px[2])});
            }
    }
    return t;
}

void save_frames(const QTensor& t, const fs::path& dir) {
    if (t.order() != 2 && t.order() != 3) throw std::invalid_argument("save_frames: expects a 2- or 3-mode tensor");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) io_fail(dir, ec.message());
    const Index rows = t.dim(0), cols = t.dim(1), frames = t.order() == 3 ? t.dim(2) : 1;
    std::vector<unsigned char> buf(static_cast<std::size_t>(3 * rows * cols));
    for (Index f = 0; f < frames; ++f) {
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) {
                const Quat q = t.at(i + rows * (j + cols * f));
                unsigned char* px = &buf[static_cast<std::size_t>(3 * (i * cols + j))];
                px[0] = to_byte(q.x);
                px[1] = to_byte(q.y);
                px[2] = to_byte(q.z);
            }
        png_image img;
        std::memset(&img, 0, sizeof img);
        img.version = PNG_IMAGE_VERSION;
        img.width = static_cast<png_uint_32>(cols);
        img.height = static_cast<png_uint_32>(rows);
        img.format = PNG_FORMAT_RGB;
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04lld.png", static_cast<long long>(f));
        const fs::path out = dir / name;
        if (!png_image_write_to_file(&img, out.c_str(), 0, buf.data(), 0, nullptr)) io_fail(out, img.message);
    }
}

std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text) {
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    for (int no = 1; std::getline(in, line); ++no) {
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(no) + ": expected key = value");
        std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("config line " + std::to_string(no) + ": empty key");
        if (!seen.insert(key).second) throw std::runtime_error("config line " + std::to_string(no) + ": repeated key " + key);
        out.emplace_back(std::move(key), std::move(val));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
    try {
        return parse_config(slurp(path));
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        if (what.rfind(path.string(), 0) == 0) throw;
        io_fail(path, what);
    }
}

}  // namespace qtc
