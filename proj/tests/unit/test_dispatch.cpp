// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <sstream>

#include "doctest.h"
#include "essr/common.hpp"
#include "essr/dispatch.hpp"
#include "../support/oracles.hpp"

using namespace essr;

TEST_CASE("luminance") {
    CHECK(luminance(Tensor(3, 2, 2, 255.0f)).at(0, 1, 1) == doctest::Approx(255.0));
    std::mt19937_64 rng(1);
    const Tensor x = oracle::random_tensor(rng, 3, 7, 9, 0, 255);
    const Tensor y = luminance(x);
    for (int yy = 0; yy < 7; ++yy)
        for (int xx = 0; xx < 9; ++xx) CHECK(y.at(0, yy, xx) == float(oracle::luma(x, yy, xx)));
    Tensor g(3, 3, 3);
    for (int c = 0; c < 3; ++c) g.at(c, 1, 2) = 77;
    CHECK(luminance(g).at(0, 1, 2) == doctest::Approx(77.0));
    CHECK_THROWS_AS(luminance(Tensor(1, 2, 2)), DimensionError);
}

TEST_CASE("edge score") {
    CHECK(edge_score(Tensor(3, 32, 32, 123.0f)) == 0.0);
    Tensor dot(3, 5, 5);
    for (int c = 0; c < 3; ++c) dot.at(c, 2, 2) = 255;
    // centre |-4*255| clamps to 255, four neighbours respond with 255
    CHECK(edge_score(dot) == doctest::Approx(51.0));
    CHECK(oracle::edge_score4(dot) == doctest::Approx(51.0));

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const Tensor x = oracle::random_tensor(rng, 3, 1 + int(rng() % 33), 1 + int(rng() % 33), 0, 255);
        const double s = edge_score(x);
        CHECK(s >= 0.0);
        CHECK(s <= 255.0);
        CHECK(s == doctest::Approx(oracle::edge_score4(x)).epsilon(1e-6));
        Tensor mirrored = x;
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < x.height(); ++y)
                for (int xx = 0; xx < x.width(); ++xx) mirrored.at(c, y, xx) = x.at(c, x.height() - 1 - y, x.width() - 1 - xx);
        CHECK(edge_score(mirrored) == doctest::Approx(s).epsilon(1e-9));
        CHECK(edge_score(x, LaplacianKernel::EightNeighbor) <= 255.0);
    }
}

TEST_CASE("decision table over integer scores") {
    const Thresholds th{};
    for (int s = 0; s <= 255; ++s) {
        const SubnetId expect = s < 8 ? SubnetId::Bilinear : (s < 40 ? SubnetId::HalfWidth : SubnetId::FullWidth);
        CHECK(decide(s, th) == expect);
        if (s > 0) CHECK(int(decide(s, th)) >= int(decide(s - 1, th)));
    }
    CHECK_THROWS_AS((Thresholds{10, 10}).validate(), ConfigError);
    CHECK_THROWS_AS((Thresholds{-1, 10}).validate(), ConfigError);
    CHECK(Thresholds::clamped(255, 255) == Thresholds{254, 255});
    CHECK(Thresholds::clamped(-3, 0) == Thresholds{0, 1});
}

TEST_CASE("controller cap and demotion") {
    ControllerState st;
    st.c54_this_second = 25500;
    const PatchDecision d = controller_step(st, 255);
    CHECK(d.subnet == SubnetId::HalfWidth);
    CHECK(d.demoted);

    ControllerState fresh;
    const PatchDecision e = controller_step(fresh, 255);
    CHECK(e.subnet == SubnetId::FullWidth);
    CHECK(fresh.c54_this_second == 1);

    ControllerState s2;
    long full = 0;
    for (int i = 0; i < 30000; ++i) full += controller_step(s2, 255).subnet == SubnetId::FullWidth;
    CHECK(full == 25500);
}

TEST_CASE("end of frame threshold rules") {
    ControllerState st;
    st.c54_this_frame = 1200;
    end_of_frame(st);
    CHECK(st.thresholds == Thresholds{9, 45});
    CHECK(st.c54_this_frame == 0);
    for (long n : {700L, 850L, 1000L}) {
        ControllerState q;
        q.c54_this_frame = n;
        end_of_frame(q);
        CHECK(q.thresholds == Thresholds{});
    }
    ControllerState low;
    low.c54_this_frame = 699;
    end_of_frame(low);
    CHECK(low.thresholds == Thresholds{7, 35});

    ControllerState run;
    for (int f = 0; f < 100; ++f) {
        end_of_frame(run);
        CHECK_NOTHROW(run.thresholds.validate());
    }
    CHECK(run.thresholds.t1 == 0);
    CHECK(run.thresholds.t2 >= 1);

    // Per-second counter resets on the 30th frame.
    ControllerState w;
    w.c54_this_second = 25500;
    w.cap_engaged = true;
    for (int f = 0; f < 29; ++f) end_of_frame(w);
    CHECK(w.c54_this_second == 25500);
    end_of_frame(w);
    CHECK(w.c54_this_second == 0);
    CHECK_FALSE(w.cap_engaged);
}

TEST_CASE("controller is deterministic") {
    std::mt19937_64 rng(3);
    std::vector<double> scores(5000);
    for (auto& s : scores) s = double(rng() % 25600) / 100.0;
    auto run = [&] {
        Controller c;
        std::vector<PatchDecision> out;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            out.push_back(c.step(scores[i]));
            if (i % 500 == 499) c.end_of_frame();
        }
        return std::make_pair(out, c.state());
    };
    CHECK(run() == run());
}

TEST_CASE("trace csv round trip") {
    std::vector<PatchDecision> d{{0, 0, 0, 1.25, SubnetId::Bilinear, false},
                                 {0, 0, 1, 12.5, SubnetId::HalfWidth, true},
                                 {3, 7, 2, 200.0, SubnetId::FullWidth, false}};
    std::stringstream s;
    write_trace_csv(s, d, 54);
    const std::string text = s.str();
    CHECK(text.rfind("frame,patch_row,patch_col,edge_score,subnet,demoted\n", 0) == 0);
    CHECK(text.find("C27") != std::string::npos);
    CHECK(read_trace_csv(s, 54) == d);
    std::stringstream broken("frame,patch_row,patch_col,edge_score,subnet,demoted\n1,2,x,0,C54,0\n");
    CHECK_THROWS_AS(read_trace_csv(broken, 54), InputError);
}
