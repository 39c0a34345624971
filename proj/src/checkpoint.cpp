#include "rwn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "rwn/error.hpp"

namespace rwn {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename U>
U to_little(U v) {
    if constexpr (std::endian::native == std::endian::big) {
        U r = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) r = (r << 8) | ((v >> (8 * i)) & 0xFF);
        return r;
    }
    return v;
}

class Writer {
public:
    void u32(std::uint32_t v) { raw(to_little(v)); }
    void f64(double v) { raw(to_little(std::bit_cast<std::uint64_t>(v))); }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    template <typename U>
    void raw(U v) { bytes(&v, sizeof v); }
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
    std::uint32_t u32() { return to_little(raw<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(to_little(raw<std::uint64_t>())); }
    void bytes(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, in_.data() + pos_, n);
        pos_ += n;
    }
    std::size_t remaining() const { return in_.size() - pos_; }
    void need(std::size_t n) const {
        if (remaining() < n) throw FormatError("checkpoint is truncated");
    }

private:
    template <typename U>
    U raw() {
        U v;
        bytes(&v, sizeof v);
        return v;
    }
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> serialize_checkpoint(const ModelCheckpoint& model) {
    const int k = model.k(), m = model.m();
    if (model.bank.k() != k || model.unary.k != k ||
        model.unary.weights.size() != static_cast<std::size_t>(m) * k ||
        model.unary.bias.size() != static_cast<std::size_t>(m))
        throw InvalidInput("checkpoint: inconsistent model shapes");
    Writer w;
    w.bytes(kCheckpointMagic, 7);
    w.bytes(&kCheckpointVersion, 1);
    for (std::uint32_t v : {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(m),
                            static_cast<std::uint32_t>(model.bank.f1), static_cast<std::uint32_t>(model.bank.f2),
                            model.bank.seed, model.iteration})
        w.u32(v);
    for (double v : model.affinity.theta) w.f64(v);
    for (double v : model.unary.weights) w.f64(v);
    for (double v : model.unary.bias) w.f64(v);
    return w.take();
}

ModelCheckpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kCheckpointMagic, 7) != 0) throw FormatError("not a checkpoint file (bad magic)");
    if (magic[7] != kCheckpointVersion)
        throw UnsupportedVersion(std::string("unsupported checkpoint version '") + magic[7] + "'");

    const std::uint32_t k = r.u32(), m = r.u32(), f1 = r.u32(), f2 = r.u32(), seed = r.u32(), iter = r.u32();
    if (static_cast<std::uint64_t>(f1) + f2 + 3 != k) throw FormatError("checkpoint: k does not equal 3 + f1 + f2");
    const std::uint64_t count = static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(m) * k + m;
    if (count * 8 != r.remaining())
        throw FormatError(count * 8 > r.remaining() ? "checkpoint is truncated" : "checkpoint has trailing bytes");

    ModelCheckpoint model;
    model.bank = FilterBankConfig{static_cast<int>(f1), static_cast<int>(f2), seed};
    model.iteration = iter;
    model.affinity.theta.resize(k);
    for (double& v : model.affinity.theta) v = r.f64();
    model.unary = UnaryParams::zeros(static_cast<int>(m), static_cast<int>(k));
    for (double& v : model.unary.weights) v = r.f64();
    for (double& v : model.unary.bias) v = r.f64();
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& model) {
    const auto bytes = serialize_checkpoint(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

} // namespace rwn
