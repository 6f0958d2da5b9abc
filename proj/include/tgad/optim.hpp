#pragma once

#include <map>
#include <string>
#include <vector>

#include "tgad/rng.hpp"
#include "tgad/tensor.hpp"

namespace tgad {

struct AdamConfig {
    double lr = 1e-3;
    double weight_decay = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Named trainable tensor with its Adam state. Gate tensors update sparsely
// (only when their graph is the batch), so each parameter keeps its own step
// counter for bias correction, and a per-parameter learning-rate scale
// compensates groups that see few updates.
struct Param {
    Tensor value;
    Tensor m;
    Tensor v;
    long step = 0;
    double lr_scale = 1.0;
};

class ParamStore {
public:
    Param& add(const std::string& name, Tensor init);
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    std::map<std::string, Param>& params() { return params_; }
    const std::map<std::string, Param>& params() const { return params_; }

    // Values only (for snapshots / restoring the best-validation state).
    std::map<std::string, Tensor> values() const;
    void set_values(const std::map<std::string, Tensor>& values);

    // Throws NumericError naming the first non-finite parameter.
    void check_finite() const;

private:
    std::map<std::string, Param> params_;
};

// Adam with decoupled weight decay applied after the adaptive step. Only
// parameters named in `grads` are touched; a zero gradient still decays.
void adam_step(ParamStore& store, const std::map<std::string, Tensor>& grads,
               const AdamConfig& cfg);

// Scales all gradients by min(1, max_norm / global_norm); returns the norm
// before clipping.
double clip_global_norm(std::map<std::string, Tensor>& grads, double max_norm);

Tensor glorot_uniform(int fan_in, int fan_out, Rng& rng);

// Named-tensor binary blob with shape headers and a format-version byte.
void save_checkpoint(const std::string& path, const std::map<std::string, Tensor>& tensors);
std::map<std::string, Tensor> load_checkpoint(const std::string& path);

} // namespace tgad
