#include <doctest.h>

#include <cmath>
#include <random>

#include "relievo/mlp.hpp"
#include "relievo/sdf_field.hpp"

using namespace relievo;

namespace {

Mat random_mat(int r, int c, std::mt19937_64& rng, real s = 1) {
    std::normal_distribution<real> d(0, s);
    Mat m(r, c);
    for (real& v : m.a) v = d(rng);
    return m;
}

MlpSpec small_spec() {
    MlpSpec s;
    s.input_dim = 3;
    s.widths = {10, 10, 10, 2};
    s.hidden = Activation::Softplus;
    s.softplus_beta = 10;
    s.skip_at = 2;
    s.pe_freqs = 2;
    return s;
}

}  // namespace

TEST_CASE("positional encoding layout and jacobian") {
    const int L = 3;
    real x[3] = {0.3, -0.8, 0.45};
    std::vector<real> enc(3 + 6 * L);
    positional_encode(x, 3, L, enc.data());
    for (int i = 0; i < 3; ++i) CHECK(enc[i] == x[i]);
    for (int k = 0; k < L; ++k)
        for (int i = 0; i < 3; ++i) {
            const real arg = std::ldexp(real(M_PI), k) * x[i];
            CHECK(enc[3 + 6 * k + i] == doctest::Approx(std::sin(arg)).epsilon(1e-14));
            CHECK(enc[3 + 6 * k + 3 + i] == doctest::Approx(std::cos(arg)).epsilon(1e-14));
        }

    // jacobian column vs finite differences
    const real h = 1e-6;
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<real> jac(enc.size()), ep(enc.size()), em(enc.size());
        positional_encode_jac(x, 3, L, axis, jac.data());
        real xp[3] = {x[0], x[1], x[2]}, xm[3] = {x[0], x[1], x[2]};
        xp[axis] += h;
        xm[axis] -= h;
        positional_encode(xp, 3, L, ep.data());
        positional_encode(xm, 3, L, em.data());
        for (size_t i = 0; i < enc.size(); ++i)
            CHECK(jac[i] == doctest::Approx((ep[i] - em[i]) / (2 * h)).epsilon(1e-5).scale(1));
    }
}

TEST_CASE("tape forward agrees with plain forward") {
    std::mt19937_64 rng(21);
    ParamStore ps;
    Mlp mlp(small_spec(), ps, "m");
    mlp.init_random(ps, rng);
    Mat X = random_mat(7, 3, rng);

    Mat out;
    mlp.forward(ps, X, out);
    Tape tape(ps);
    int node = mlp.tape_forward_const(tape, X);
    const Mat& tv = tape.val(node);
    REQUIRE(tv.rows == out.rows);
    REQUIRE(tv.cols == out.cols);
    for (size_t i = 0; i < out.a.size(); ++i)
        CHECK(tv.a[i] == doctest::Approx(out.a[i]).epsilon(1e-12));
}

TEST_CASE("input gradient (forward-mode) matches finite differences") {
    std::mt19937_64 rng(22);
    ParamStore ps;
    Mlp mlp(small_spec(), ps, "m");
    mlp.init_random(ps, rng);
    Mat X = random_mat(5, 3, rng);

    Mat out, grad;
    mlp.forward_with_input_grad(ps, X, out, grad);
    const real h = 1e-6;
    for (int r = 0; r < X.rows; ++r)
        for (int c = 0; c < 3; ++c) {
            Mat Xp = X, Xm = X;
            Xp.at(r, c) += h;
            Xm.at(r, c) -= h;
            Mat op, om;
            mlp.forward(ps, Xp, op);
            mlp.forward(ps, Xm, om);
            const real fd = (op.at(r, 0) - om.at(r, 0)) / (2 * h);
            CHECK(grad.at(r, c) == doctest::Approx(fd).epsilon(1e-5).scale(1));
        }
}

TEST_CASE("on-tape spatial gradient: values and second-order parameter gradients") {
    std::mt19937_64 rng(23);
    ParamStore ps;
    Mlp mlp(small_spec(), ps, "m");
    mlp.init_random(ps, rng);
    Mat X = random_mat(4, 3, rng);

    Mat out, grad;
    mlp.forward_with_input_grad(ps, X, out, grad);

    Tape tape(ps);
    int out_node, grad_node;
    mlp.tape_forward_with_spatial_grad(tape, X, out_node, grad_node);
    const Mat& tg = tape.val(grad_node);
    REQUIRE(tg.rows == 4);
    REQUIRE(tg.cols == 3);
    for (size_t i = 0; i < grad.a.size(); ++i)
        CHECK(tg.a[i] == doctest::Approx(grad.a[i]).epsilon(1e-10).scale(1));

    // loss = mean (|grad| - 1)^2: its parameter gradient exercises
    // double-backprop through the tangent chain
    auto eval = [&]() {
        Tape t(ps);
        int on, gn;
        mlp.tape_forward_with_spatial_grad(t, X, on, gn);
        return t.scalar(t.sum_all(t.square(t.affine(t.row_norm(gn), 1, -1)), real(0.25)));
    };
    ps.zero_grads();
    {
        Tape t(ps);
        int on, gn;
        mlp.tape_forward_with_spatial_grad(t, X, on, gn);
        t.backward(t.sum_all(t.square(t.affine(t.row_norm(gn), 1, -1)), real(0.25)));
    }
    const real h = 1e-6;
    std::mt19937_64 pick(3);
    for (int id = 0; id < ps.count(); ++id) {
        std::uniform_int_distribution<size_t> d(0, ps[id].size() - 1);
        for (int k = 0; k < 3; ++k) {
            const size_t i = d(pick);
            const real save = ps[id].v[i];
            ps[id].v[i] = save + h;
            const real fp = eval();
            ps[id].v[i] = save - h;
            const real fm = eval();
            ps[id].v[i] = save;
            CHECK(ps[id].g[i] ==
                  doctest::Approx((fp - fm) / (2 * h)).epsilon(1e-4).scale(1e-3));
        }
    }
}

TEST_CASE("sphere initialization carves a sphere of the requested radius") {
    std::mt19937_64 rng(31);
    ParamStore ps;
    SdfFieldSpec spec;
    spec.width = 512;  // the geometric init concentrates as the width grows
    spec.feature_dim = 8;
    SdfField field(spec, ps, "sdf");
    field.init_sphere(rng, real(1.0));

    std::uniform_real_distribution<real> u(-1, 1);
    for (int trial = 0; trial < 16; ++trial) {
        Vec3 d = normalized({u(rng), u(rng), u(rng)});
        CHECK(field.value(d * real(1.8)) > 0);
        CHECK(field.value(d * real(0.3)) < 0);
        // zero crossing near radius 1
        real lo = 0.3, hi = 1.8;
        for (int i = 0; i < 40; ++i) {
            real mid = (lo + hi) / 2;
            (field.value(d * mid) < 0 ? lo : hi) = mid;
        }
        CHECK(std::abs((lo + hi) / 2 - 1) < 0.4);
        // near-unit gradients out of the box
        Vec3 g = field.gradient(d * real(1.2));
        CHECK(length(g) == doctest::Approx(1).epsilon(0.5));
    }
}

TEST_CASE("pull moves points onto the zero level set, then stays put") {
    std::mt19937_64 rng(33);
    ParamStore ps;
    SdfFieldSpec spec;
    spec.width = 64;
    spec.feature_dim = 8;
    SdfField field(spec, ps, "sdf");
    field.init_sphere(rng, 1);

    std::uniform_real_distribution<real> u(-1, 1);
    for (int trial = 0; trial < 16; ++trial) {
        Vec3 x = normalized(Vec3{u(rng), u(rng), u(rng)}) * real(1.1);
        Vec3 p = x;
        for (int it = 0; it < 8; ++it) {
            auto q = field.pull_to_surface(p);
            REQUIRE(q.has_value());
            p = *q;
        }
        CHECK(std::abs(field.value(p)) < 1e-6);
        auto again = field.pull_to_surface(p);
        REQUIRE(again.has_value());
        CHECK(length(*again - p) < 1e-6);
    }
}
