#pragma once

#include "relievo/tape.hpp"

namespace relievo {

struct LossWeights {
    real eta1 = 100;   // mask
    real eta2 = 0.1;   // eikonal
    real eta3 = 1.0;   // registration
    real eta4 = 1.0;   // normal
    real alpha = 50;   // silhouette sharpness (scheduled by the trainer)
};

// Node ids of the per-step loss terms; -1 marks a term that had no pixels
// (it contributes zero to the total).
struct LossNodes {
    int photo = -1;
    int mask = -1;
    int eikonal = -1;
    int registration = -1;
    int normal = -1;
    int total = -1;
};

// --- tape builders -------------------------------------------------------
// All sums normalize by the full batch size |P|, which can exceed the row
// count of the nodes passed in (P^rgb or the background subset).

// L1 photometric over P^rgb rows: sum_p M_p * sum_c |I - c| / |P|.
int photometric_loss(Tape& tape, int color_node, const Mat& target, const Mat& mask,
                     int batch_size);

// Silhouette term. min_sdf_node holds F at each ray's along-march
// minimizer; weights are (1 - M_p) for background-labeled rays (the trainer
// reuses the same builder with a negated node and weights M_p for
// foreground-labeled rays the model misses). The cross-entropy
// -log(1 - sigmoid(-a u)) is evaluated as softplus(-a u), which is exact
// and never overflows.
int mask_loss(Tape& tape, int min_sdf_node, const Mat& weights, real alpha, int batch_size);

// E[(|grad F| - 1)^2] over the rows of grad_node.
int eikonal_loss(Tape& tape, int grad_node);

// Mean |x_p - x*dag| over P^rgb, normalized by |P|.
int registration_loss(Tape& tape, int xp_node, int pulled_node, int batch_size);

// Mean cosine dissimilarity between the on-tape raw SDF gradient and the
// (constant) coarse-mesh normal, normalized by |P|.
int normal_loss(Tape& tape, int grad_node, const Mat& coarse_normals, int batch_size);

// Weighted Eq.-6 total; missing terms (-1) are skipped.
LossNodes total_loss(Tape& tape, LossNodes terms, const LossWeights& w);

// --- differentiable geometry helpers ------------------------------------

// Differentiable ray/surface intersection: with x0 the converged hit and
// denom = grad F(x0; theta0) . v frozen at the current parameters,
//   x_p(theta) = x0 - (v / denom) * F(x0; theta).
// sdf_node is F(x0) on tape (B x 1); x0, v, denom are step constants.
int intersection_node(Tape& tape, int sdf_node, const Mat& x0, const Mat& v, const Mat& denom);

// On-tape pull toward the zero level set (applied at constant points x*):
//   xdag = x* - F * grad / max(|grad|, 1e-12)  (signed F: works from inside).
int pull_node(Tape& tape, int sdf_node, int grad_node, const Mat& xstar);

}  // namespace relievo
