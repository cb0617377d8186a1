#include "rfio/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rfio {

namespace {

void write_blob(std::ofstream& out, const std::vector<complexd>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(complexd)));
}

void read_blob(std::ifstream& in, std::vector<complexd>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(complexd)));
    if (!in) throw std::runtime_error("truncated binary payload");
}

} // namespace

void save_density(const std::filesystem::path& path, const HalfDensity& f,
                  const PolarFrequencyGrid& grid) {
    if (!f.matches(grid)) throw std::invalid_argument("save_density: shape mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "rfio-density v1 nr=" << f.nr << " na=" << f.na << std::hex << " grid=0x"
        << grid.hash() << std::dec << "\n";
    write_blob(out, f.values);
}

HalfDensity load_density(const std::filesystem::path& path, const PolarFrequencyGrid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    std::size_t nr = 0, na = 0;
    std::uint64_t hash = 0;
    if (std::sscanf(header.c_str(), "rfio-density v1 nr=%zu na=%zu grid=0x%llx", &nr, &na,
                    reinterpret_cast<unsigned long long*>(&hash)) != 3)
        throw std::runtime_error("bad density header in " + path.string());
    if (hash != grid.hash()) throw std::runtime_error("density grid hash mismatch");
    HalfDensity f(nr, na);
    if (!f.matches(grid)) throw std::runtime_error("density shape does not match grid");
    read_blob(in, f.values);
    return f;
}

void save_field(const std::filesystem::path& path, const SpatialField& F,
                const SpatialGrid& grid) {
    if (F.size() != grid.size()) throw std::invalid_argument("save_field: shape mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "rfio-field v1 n=" << F.size() << std::hex << " grid=0x" << grid.hash() << std::dec
        << "\n";
    write_blob(out, F.values);
}

SpatialField load_field(const std::filesystem::path& path, const SpatialGrid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    std::size_t n = 0;
    std::uint64_t hash = 0;
    if (std::sscanf(header.c_str(), "rfio-field v1 n=%zu grid=0x%llx", &n,
                    reinterpret_cast<unsigned long long*>(&hash)) != 2)
        throw std::runtime_error("bad field header in " + path.string());
    if (hash != grid.hash()) throw std::runtime_error("field grid hash mismatch");
    if (n != grid.size()) throw std::runtime_error("field shape does not match grid");
    SpatialField F(n);
    read_blob(in, F.values);
    return F;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct CsvWriter::Impl {
    std::ofstream out;
};

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : impl_(new Impl) {
    impl_->out.open(path);
    if (!impl_->out) throw std::runtime_error("cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        impl_->out << header[i] << (i + 1 < header.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        impl_->out << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::row_labeled(const std::string& label, const std::vector<double>& values) {
    impl_->out << label;
    for (double v : values) impl_->out << "," << format_double(v);
    impl_->out << "\n";
}

} // namespace rfio
