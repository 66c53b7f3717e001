#include <sic/errors.hpp>
#include <sic/signal.hpp>

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

static_assert(std::endian::native == std::endian::little, "dataset I/O assumes a little-endian host");

namespace sic {

namespace {

constexpr char kMagic[4] = {'S', 'I', 'C', 'D'};
constexpr std::uint16_t kFlagClean = 1;

class Writer
{
public:
    template <class T>
    void put(T v)
    {
        const auto* p = reinterpret_cast<const char*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }
    void put_block(const ComplexSeq& s)
    {
        for (const auto& v : s.samples) {
            put(v.real());
            put(v.imag());
        }
    }
    const std::vector<char>& bytes() const { return buf_; }

private:
    std::vector<char> buf_;
};

class Reader
{
public:
    Reader(std::vector<char> buf, std::string path) : buf_(std::move(buf)), path_(std::move(path)) {}

    template <class T>
    T get(const char* field)
    {
        if (pos_ + sizeof(T) > buf_.size()) {
            throw DataError(path_ + ": truncated at byte " + std::to_string(pos_) + " while reading " + field +
                            " (file has " + std::to_string(buf_.size()) + " bytes)");
        }
        T v;
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    ComplexSeq get_block(std::size_t n, double fs, const char* field)
    {
        const std::size_t need = n * 2 * sizeof(double);
        if (buf_.size() - pos_ < need) {
            throw DataError(path_ + ": truncated at byte " + std::to_string(buf_.size()) + " in block " + field +
                            " (expected " + std::to_string(need) + " bytes from byte " + std::to_string(pos_) + ")");
        }
        ComplexSeq s;
        s.sample_rate_hz = fs;
        s.samples.resize(n);
        std::memcpy(s.samples.data(), buf_.data() + pos_, need);
        pos_ += need;
        return s;
    }

    std::size_t pos() const { return pos_; }
    std::size_t size() const { return buf_.size(); }
    const std::string& path() const { return path_; }

private:
    std::vector<char> buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace

void save_dataset(const Dataset& ds, const std::string& path, const std::string& config_hash)
{
    ds.validate();
    Writer w;
    for (char c : kMagic) {
        w.put(c);
    }
    w.put(kDatasetVersion);
    w.put(static_cast<std::uint16_t>(ds.y_clean ? kFlagClean : 0));
    w.put(static_cast<std::uint64_t>(ds.size()));
    w.put(ds.x.sample_rate_hz);
    w.put(static_cast<std::uint64_t>(ds.split_index));
    w.put(ds.norm.x_mean.real());
    w.put(ds.norm.x_mean.imag());
    w.put(ds.norm.x_var);
    w.put(ds.norm.resid_mean.real());
    w.put(ds.norm.resid_mean.imag());
    w.put(ds.norm.resid_var);
    w.put(static_cast<std::uint32_t>(ds.norm.resid_taps));
    w.put_block(ds.x);
    w.put_block(ds.y);
    if (ds.y_clean) {
        w.put_block(*ds.y_clean);
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw DataError("cannot open " + path + " for writing");
    }
    f.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!f) {
        throw DataError("write failed: " + path);
    }

    nlohmann::ordered_json side;
    side["format"] = "SICD";
    if (!config_hash.empty()) {
        side["config_hash"] = config_hash;
    }
    side["version"] = kDatasetVersion;
    side["n_samples"] = ds.size();
    side["sample_rate_hz"] = ds.x.sample_rate_hz;
    side["split_index"] = ds.split_index;
    side["has_noiseless"] = ds.y_clean.has_value();
    side["x_mean"] = {ds.norm.x_mean.real(), ds.norm.x_mean.imag()};
    side["x_var"] = ds.norm.x_var;
    side["resid_mean"] = {ds.norm.resid_mean.real(), ds.norm.resid_mean.imag()};
    side["resid_var"] = ds.norm.resid_var;
    side["resid_taps"] = ds.norm.resid_taps;
    std::ofstream js(path + ".json", std::ios::trunc);
    if (!js) {
        throw DataError("cannot open " + path + ".json for writing");
    }
    js << side.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw DataError("cannot open dataset " + path);
    }
    Reader r(std::vector<char>(std::istreambuf_iterator<char>(f), {}), path);

    char magic[4];
    for (char& c : magic) {
        c = r.get<char>("magic");
    }
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError(path + ": bad magic at byte 0, not a SICD dataset");
    }
    const auto version = r.get<std::uint16_t>("version");
    if (version != kDatasetVersion) {
        throw DataError(path + ": unsupported dataset version " + std::to_string(version) + " at byte 4 (expected " +
                        std::to_string(kDatasetVersion) + ")");
    }
    const auto flags = r.get<std::uint16_t>("flags");
    if ((flags & ~kFlagClean) != 0) {
        throw DataError(path + ": unknown flag bits at byte 6");
    }
    const auto n = r.get<std::uint64_t>("n_samples");
    Dataset ds;
    const double fs = r.get<double>("sample_rate");
    ds.split_index = r.get<std::uint64_t>("split_index");
    const double xm_re = r.get<double>("x_mean.re");
    const double xm_im = r.get<double>("x_mean.im");
    ds.norm.x_mean = {xm_re, xm_im};
    ds.norm.x_var = r.get<double>("x_var");
    const double rm_re = r.get<double>("resid_mean.re");
    const double rm_im = r.get<double>("resid_mean.im");
    ds.norm.resid_mean = {rm_re, rm_im};
    ds.norm.resid_var = r.get<double>("resid_var");
    ds.norm.resid_taps = static_cast<int>(r.get<std::uint32_t>("resid_taps"));

    const std::size_t blocks = (flags & kFlagClean) ? 3 : 2;
    if (n > (r.size() - r.pos()) / (blocks * 2 * sizeof(double)) + 1) {
        throw DataError(path + ": header declares " + std::to_string(n) + " samples but only " +
                        std::to_string(r.size() - r.pos()) + " payload bytes follow byte " + std::to_string(r.pos()));
    }
    ds.x = r.get_block(n, fs, "x");
    ds.y = r.get_block(n, fs, "y");
    if (flags & kFlagClean) {
        ds.y_clean = r.get_block(n, fs, "y_clean");
    }
    if (r.pos() != r.size()) {
        throw DataError(path + ": " + std::to_string(r.size() - r.pos()) + " trailing bytes after byte " +
                        std::to_string(r.pos()));
    }
    try {
        ds.validate();
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
    return ds;
}

} // namespace sic
