#pragma once

#include <string>

#include "lizard/dataset.hpp"
#include "lizard/types.hpp"

namespace lizard {

enum class Padding { kSame, kValid };

// Architecture descriptor. The scaled feature vector is treated as a
// 1-channel sequence of length input_dim in canonical column order; the
// conv layer lifts it to `filters` channels, two GRUs read the result in
// opposite directions, and a sigmoid head maps the concatenated final
// hidden states to (0, 1).
struct NetSpec {
  int input_dim = 6;   // p
  int filters = 3;     // F
  int kernel = 3;      // k
  int hidden = 4;      // H, per direction
  Padding padding = Padding::kSame;

  int seq_len() const {
    return padding == Padding::kSame ? input_dim : input_dim - kernel + 1;
  }
  // F*k + F  +  2 * [3 * (H*F + H*H + H)]  +  (2H + 1)
  int param_count() const;
  void validate() const;
};

// One direction of GRU gate parameters. W maps the F-channel input, U the
// previous hidden state; one bias per gate.
struct GruParams {
  Mat w_update, u_update;  // z
  Mat w_reset, u_reset;    // r
  Mat w_cand, u_cand;      // n
  Vec b_update, b_reset, b_cand;
};

// Flattening order (row-major within each matrix):
//   conv weights (filter-major), conv biases,
//   forward GRU gates z, r, n -- each as W, U, b --
//   backward GRU likewise, head weights (forward half first), head bias.
struct NetParams {
  Mat conv_w;  // F x k, one filter per row
  Vec conv_b;  // F
  GruParams fwd, bwd;
  Vec head_w;  // 2H
  double head_b = 0.0;
};

Vec flatten(const NetSpec& spec, const NetParams& params);
// Consumes exactly param_count values; throws ArgumentError otherwise.
NetParams unflatten(const NetSpec& spec, Eigen::Ref<const Vec> flat);

// Linear cross-correlation response, one row per output step, one column
// per filter. Same padding zero-pads symmetrically with the extra zero on
// the right for even kernels; valid padding yields p-k+1 steps.
Mat conv1d_response(const NetSpec& spec, const Mat& conv_w, const Vec& conv_b,
                    Eigen::Ref<const Vec> seq);
// tanh of the response; the layer the pipeline uses.
Mat conv1d_forward(const NetSpec& spec, const Mat& conv_w, const Vec& conv_b,
                   Eigen::Ref<const Vec> seq);

//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   n = tanh(Wn x + Un (r . h) + bn)
//   h' = (1 - z) . h + z . n
Vec gru_cell_step(const GruParams& gate, Eigen::Ref<const Vec> x_t,
                  Eigen::Ref<const Vec> h_prev);

// Concatenation of the forward GRU's final state over t = 1..T and the
// backward GRU's final state over t = T..1, both started from zeros.
Vec bigru_forward(const NetSpec& spec, const GruParams& fwd,
                  const GruParams& bwd, const Mat& seq);

// sigmoid(head_w . bigru(conv(x)) + head_b); expects x already scaled.
double predict(const NetSpec& spec, const NetParams& params,
               Eigen::Ref<const Vec> x);
double predict(const NetSpec& spec, Eigen::Ref<const Vec> flat_params,
               Eigen::Ref<const Vec> x);

// Vectorized forward pass over the rows of X; this is the path the
// training objective and the CLI use. Agrees with predict() per row.
Vec predict_batch(const NetSpec& spec, const NetParams& params, const Mat& X);

// Training-set MSE of predict_batch against the targets; the objective the
// optimizer minimizes.
double fitness(const NetSpec& spec, const NetParams& params,
               const Dataset& scaled_train);
double fitness(const NetSpec& spec, Eigen::Ref<const Vec> flat_params,
               const Dataset& scaled_train);

// Trained model: architecture, the feature scaler learned on the training
// split, and the flattened parameter vector.
struct NeuralModel {
  NetSpec spec;
  Scaler scaler;
  Vec params;
};

void save_neural(const NeuralModel& model, const std::string& path);
NeuralModel load_neural(const std::string& path);

}  // namespace lizard
