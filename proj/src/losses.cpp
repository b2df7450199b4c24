#include "relievo/losses.hpp"

namespace relievo {

int photometric_loss(Tape& tape, int color_node, const Mat& target, const Mat& mask,
                     int batch_size) {
    int diff = tape.abs_(tape.sub(tape.constant(target), color_node));
    int masked = tape.row_scale(diff, tape.constant(mask));
    return tape.sum_all(masked, real(1) / batch_size);
}

int mask_loss(Tape& tape, int min_sdf_node, const Mat& weights, real alpha, int batch_size) {
    int ce = tape.softplus(tape.affine(min_sdf_node, -alpha, 0));
    int weighted = tape.row_scale(ce, tape.constant(weights));
    return tape.sum_all(weighted, real(1) / (alpha * batch_size));
}

int eikonal_loss(Tape& tape, int grad_node) {
    int dev = tape.affine(tape.row_norm(grad_node), 1, -1);
    return tape.sum_all(tape.square(dev), real(1) / tape.val(grad_node).rows);
}

int registration_loss(Tape& tape, int xp_node, int pulled_node, int batch_size) {
    int dist = tape.row_norm(tape.sub(xp_node, pulled_node));
    return tape.sum_all(dist, real(1) / batch_size);
}

int normal_loss(Tape& tape, int grad_node, const Mat& coarse_normals, int batch_size) {
    int ref = tape.constant(coarse_normals);
    int dot = tape.row_dot(grad_node, ref);
    int denom = tape.clamp_min(tape.mul(tape.row_norm(grad_node), tape.row_norm(ref)),
                               real(1e-8));
    int cosine = tape.mul(dot, tape.recip(denom));
    return tape.sum_all(tape.affine(cosine, -1, 1), real(1) / batch_size);
}

LossNodes total_loss(Tape& tape, LossNodes t, const LossWeights& w) {
    int acc = -1;
    auto accumulate = [&](int node, real weight) {
        if (node < 0 || weight == 0) return;
        acc = acc < 0 ? tape.affine(node, weight, 0) : tape.axpby(1, acc, weight, node);
    };
    accumulate(t.photo, 1);
    accumulate(t.mask, w.eta1);
    accumulate(t.eikonal, w.eta2);
    accumulate(t.registration, w.eta3);
    accumulate(t.normal, w.eta4);
    if (acc < 0) {
        Mat zero(1, 1);
        acc = tape.constant(zero);
    }
    t.total = acc;
    return t;
}

int intersection_node(Tape& tape, int sdf_node, const Mat& x0, const Mat& v, const Mat& denom) {
    Mat step(v.rows, 3);
    for (int r = 0; r < v.rows; ++r)
        for (int c = 0; c < 3; ++c) step.at(r, c) = -v.at(r, c) / denom.a[r];
    return tape.add(tape.constant(x0), tape.row_scale(tape.constant(step), sdf_node));
}

int pull_node(Tape& tape, int sdf_node, int grad_node, const Mat& xstar) {
    int inv_norm = tape.recip(tape.clamp_min(tape.row_norm(grad_node), real(1e-12)));
    int unit = tape.row_scale(grad_node, inv_norm);
    int disp = tape.row_scale(unit, sdf_node);  // signed: pull from either side
    return tape.sub(tape.constant(xstar), disp);
}

}  // namespace relievo
