/*
* Copyright (C) 2026 sphcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef SPHCAST_CHECKPOINT_HPP
#define SPHCAST_CHECKPOINT_HPP

#include "sphcast/slstm.hpp"
#include "sphcast/train.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace sphcast {

/// Flat little-endian binary checkpoint:
///   8-byte magic "SPHCKPT1",
///   member spec (horizon_len, target_offset, seed as u64),
///   network shape (input channels, layer widths, projection width, horizon,
///   quantile levels as f64),
///   then every parameter as raw f64 in canonical order.
/// Raw IEEE bytes make the round trip exact.
namespace ckpt {

inline constexpr char MAGIC[8] = {'S', 'P', 'H', 'C', 'K', 'P', 'T', '1'};

inline void write_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

inline std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw ValidationError("checkpoint: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

inline void write_f64(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(out, bits);
}

inline double read_f64(std::istream& in) {
    std::uint64_t bits = read_u64(in);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

} // namespace ckpt

struct Checkpoint {
    MemberSpec spec;
    SlstmParams params;
};

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write checkpoint '" + path + "'");
    out.write(ckpt::MAGIC, 8);
    ckpt::write_u64(out, c.spec.horizon_len);
    ckpt::write_u64(out, c.spec.target_offset);
    ckpt::write_u64(out, c.spec.seed);
    const SlstmConfig& cfg = c.params.config;
    ckpt::write_u64(out, cfg.input_channels);
    ckpt::write_u64(out, cfg.lstm_widths.size());
    for (std::size_t w : cfg.lstm_widths) ckpt::write_u64(out, w);
    ckpt::write_u64(out, cfg.proj_dim);
    ckpt::write_u64(out, cfg.horizon);
    ckpt::write_u64(out, cfg.quantile_levels.size());
    for (double l : cfg.quantile_levels) ckpt::write_f64(out, l);
    auto ptrs = parameter_pointers(const_cast<SlstmParams&>(c.params));
    ckpt::write_u64(out, ptrs.size());
    for (double* p : ptrs) ckpt::write_f64(out, *p);
    if (!out) throw RuntimeFailure("write failed for checkpoint '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, ckpt::MAGIC, 8) != 0)
        throw ValidationError("'" + path + "' is not a checkpoint file");
    Checkpoint c;
    c.spec.horizon_len = ckpt::read_u64(in);
    c.spec.target_offset = ckpt::read_u64(in);
    c.spec.seed = ckpt::read_u64(in);
    SlstmConfig cfg;
    cfg.input_channels = ckpt::read_u64(in);
    cfg.lstm_widths.resize(ckpt::read_u64(in));
    for (auto& w : cfg.lstm_widths) w = ckpt::read_u64(in);
    cfg.proj_dim = ckpt::read_u64(in);
    cfg.horizon = ckpt::read_u64(in);
    cfg.quantile_levels.resize(ckpt::read_u64(in));
    for (auto& l : cfg.quantile_levels) l = ckpt::read_f64(in);
    c.params = SlstmParams::zeros(cfg);
    auto ptrs = parameter_pointers(c.params);
    std::uint64_t n = ckpt::read_u64(in);
    if (n != ptrs.size())
        throw ValidationError("'" + path + "': parameter count " + std::to_string(n) +
                              " does not match shape (" + std::to_string(ptrs.size()) + ")");
    for (double* p : ptrs) *p = ckpt::read_f64(in);
    return c;
}

} // namespace sphcast

#endif
