#include "tgad/optim.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "tgad/errors.hpp"

namespace tgad {

Param& ParamStore::add(const std::string& name, Tensor init) {
    if (params_.count(name)) throw NumericError("ParamStore: duplicate parameter " + name);
    Param p;
    p.m = Tensor(init.shape);
    p.v = Tensor(init.shape);
    p.value = std::move(init);
    return params_.emplace(name, std::move(p)).first->second;
}

Param& ParamStore::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw NumericError("ParamStore: unknown parameter " + name);
    return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw NumericError("ParamStore: unknown parameter " + name);
    return it->second;
}

std::map<std::string, Tensor> ParamStore::values() const {
    std::map<std::string, Tensor> out;
    for (const auto& [name, p] : params_) out.emplace(name, p.value);
    return out;
}

void ParamStore::set_values(const std::map<std::string, Tensor>& values) {
    for (const auto& [name, t] : values) {
        Param& p = at(name);
        if (!p.value.same_shape(t))
            throw NumericError("ParamStore: shape mismatch restoring " + name);
        p.value = t;
    }
}

void ParamStore::check_finite() const {
    for (const auto& [name, p] : params_) {
        if (!p.value.all_finite())
            throw NumericError("non-finite values in parameter " + name);
    }
}

void adam_step(ParamStore& store, const std::map<std::string, Tensor>& grads,
               const AdamConfig& cfg) {
    for (const auto& [name, g] : grads) {
        Param& p = store.at(name);
        if (!p.value.same_shape(g))
            throw NumericError("adam_step: gradient shape mismatch for " + name);
        p.step += 1;
        const double lr = cfg.lr * p.lr_scale;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step));
        for (int i = 0; i < p.value.size(); ++i) {
            p.m[i] = cfg.beta1 * p.m[i] + (1.0 - cfg.beta1) * g[i];
            p.v[i] = cfg.beta2 * p.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = p.m[i] / bc1;
            const double vhat = p.v[i] / bc2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
            // decoupled decay, after the adaptive step
            p.value[i] -= lr * cfg.weight_decay * p.value[i];
        }
    }
}

double clip_global_norm(std::map<std::string, Tensor>& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& [name, g] : grads)
        for (int i = 0; i < g.size(); ++i) sq += g[i] * g[i];
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for (auto& [name, g] : grads)
            for (int i = 0; i < g.size(); ++i) g[i] *= scale;
    }
    return norm;
}

Tensor glorot_uniform(int fan_in, int fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor t({fan_in, fan_out});
    for (double& x : t.data) x = rng.uniform(-limit, limit);
    return t;
}

namespace {
constexpr std::uint32_t kCheckpointMagic = 0x5447434bu; // "TGCK"
constexpr std::uint8_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError("checkpoint: truncated file");
    return v;
}
} // namespace

void save_checkpoint(const std::string& path, const std::map<std::string, Tensor>& tensors) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("checkpoint: cannot open " + path + " for writing");
    write_pod(os, kCheckpointMagic);
    write_pod(os, kCheckpointVersion);
    write_pod(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        write_pod(os, static_cast<std::uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod(os, static_cast<std::uint8_t>(t.shape.size()));
        for (int d : t.shape) write_pod(os, static_cast<std::uint32_t>(d));
        os.write(reinterpret_cast<const char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
    if (!os) throw DataError("checkpoint: write failed for " + path);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot open " + path);
    if (read_pod<std::uint32_t>(is) != kCheckpointMagic)
        throw DataError("checkpoint: bad magic in " + path);
    if (read_pod<std::uint8_t>(is) != kCheckpointVersion)
        throw DataError("checkpoint: unsupported format version in " + path);
    const auto count = read_pod<std::uint32_t>(is);
    std::map<std::string, Tensor> out;
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto name_len = read_pod<std::uint16_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const auto rank = read_pod<std::uint8_t>(is);
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(read_pod<std::uint32_t>(is));
        Tensor t(shape);
        is.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        if (!is) throw DataError("checkpoint: truncated tensor data in " + path);
        out.emplace(std::move(name), std::move(t));
    }
    return out;
}

} // namespace tgad
