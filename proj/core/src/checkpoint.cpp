#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "scle/ensemble.hpp"
#include "scle/error.hpp"

namespace scle {

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'C', 'L', 'E', 'C', 'K', 'P', 'T'};

class Writer {
public:
    template <typename T>
    void put(const T& v) {
        const auto* p = reinterpret_cast<const char*>(&v);
        buf_.append(p, sizeof(T));
    }
    void put_bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
    const std::string& str() const { return buf_; }

private:
    std::string buf_;
};

class Reader {
public:
    Reader(const std::string& buf, std::string path) : buf_(buf), path_(std::move(path)) {}
    template <typename T>
    T get() {
        T v;
        get_bytes(&v, sizeof(T));
        return v;
    }
    void get_bytes(void* p, std::size_t n) {
        if (pos_ + n > buf_.size()) throw RunError("ensemble", "checkpoint " + path_ + " is truncated");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::size_t pos() const { return pos_; }

private:
    const std::string& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const EnsembleAccumulator& acc = ckpt.accumulator;
    Writer w;
    w.put_bytes(kMagic, sizeof kMagic);
    w.put<std::uint32_t>(Checkpoint::kVersion);
    w.put<std::uint32_t>(0);
    w.put<std::uint64_t>(ckpt.config_fingerprint);
    w.put<std::uint64_t>(acc.master_seed());
    w.put<std::uint64_t>(ckpt.block_size);
    w.put<std::uint64_t>(ckpt.next_index);
    w.put<std::uint64_t>(acc.count());
    w.put<std::uint64_t>(acc.rejected());
    w.put<std::uint64_t>(acc.n_observables());
    w.put<std::uint64_t>(acc.n_points());
    w.put_bytes(acc.mean().data(), acc.mean().size() * sizeof(Complex));
    w.put_bytes(acc.m2_re().data(), acc.m2_re().size() * sizeof(double));
    w.put_bytes(acc.m2_im().data(), acc.m2_im().size() * sizeof(double));
    const std::uint64_t h = fnv1a(w.str().data(), w.str().size());
    w.put(h);

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw RunError("ensemble", "cannot write checkpoint " + tmp.string());
        out.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
        if (!out) throw RunError("ensemble", "failed writing checkpoint " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw RunError("ensemble", "cannot move checkpoint into place: " + ec.message());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RunError("ensemble", "cannot open checkpoint " + path.string());
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(buf, path.string());

    char magic[8];
    r.get_bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw RunError("ensemble", path.string() + " is not a checkpoint file");
    }
    const auto version = r.get<std::uint32_t>();
    if (version != Checkpoint::kVersion) {
        throw RunError("ensemble", "checkpoint schema version " + std::to_string(version) +
                                       " is not supported (expected " +
                                       std::to_string(Checkpoint::kVersion) + ")");
    }
    r.get<std::uint32_t>();
    Checkpoint ck;
    ck.config_fingerprint = r.get<std::uint64_t>();
    const auto seed = r.get<std::uint64_t>();
    ck.block_size = r.get<std::uint64_t>();
    ck.next_index = r.get<std::uint64_t>();
    const auto count = r.get<std::uint64_t>();
    const auto rejected = r.get<std::uint64_t>();
    const auto n_obs = r.get<std::uint64_t>();
    const auto n_pts = r.get<std::uint64_t>();
    const std::uint64_t n = n_obs * n_pts;
    if (n_obs > (1u << 20) || n_pts > (1ull << 32) || n * 32 + r.pos() + 8 != buf.size()) {
        throw RunError("ensemble", "checkpoint " + path.string() + " has an inconsistent size");
    }
    std::vector<Complex> mean(n);
    std::vector<double> m2_re(n), m2_im(n);
    r.get_bytes(mean.data(), n * sizeof(Complex));
    r.get_bytes(m2_re.data(), n * sizeof(double));
    r.get_bytes(m2_im.data(), n * sizeof(double));
    const std::uint64_t expect = fnv1a(buf.data(), r.pos());
    if (r.get<std::uint64_t>() != expect) {
        throw RunError("ensemble", "checkpoint " + path.string() + " failed its integrity check");
    }
    ck.accumulator = EnsembleAccumulator(n_obs, n_pts, seed);
    ck.accumulator.restore(count, rejected, std::move(mean), std::move(m2_re), std::move(m2_im));
    return ck;
}

}  // namespace scle
