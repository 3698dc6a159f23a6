#pragma once

// Baseline sequential JPEG (ITU-T T.81, SOF0 + JFIF) at the coefficient
// level: the parser recovers quantized DCT indices and tables exactly as
// coded, the encoder synthesizes streams with Annex K tables scaled by the
// IJG quality factor rule. Progressive, arithmetic and 12-bit streams are
// rejected.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jsd/dct.hpp"
#include "jsd/errors.hpp"
#include "jsd/image.hpp"

namespace jsd {

struct QuantTable {
    std::array<int, 64> entries{};  // zig-zag order, values in [1,255]
    int id = 0;

    double step_zz(int zz) const { return static_cast<double>(entries[zz]); }
    // step for natural (row-major) frequency index
    double step_nat(int nat) const {
        for (int i = 0; i < 64; ++i)
            if (kZigzag[i] == nat) return entries[i];
        return 1.0;
    }
};

struct Component {
    int id = 1;
    int h = 1, v = 1;        // sampling factors
    int quant_table_id = 0;
    int width = 0, height = 0;  // component raster size
    int bw = 0, bh = 0;         // block grid = ceil(size/8)
    std::vector<std::array<int, 64>> blocks;  // gamma, zig-zag order

    std::array<int, 64>& block(int bx, int by) {
        return blocks[static_cast<size_t>(by) * bw + bx];
    }
    const std::array<int, 64>& block(int bx, int by) const {
        return blocks[static_cast<size_t>(by) * bw + bx];
    }
};

// Everything a baseline JPEG stream says about the image.
struct CoefficientImage {
    int width = 0;
    int height = 0;
    std::vector<Component> components;
    std::array<std::optional<QuantTable>, 4> tables;

    const QuantTable& table_for(const Component& c) const {
        const auto& t = tables[c.quant_table_id];
        if (!t) throw CorruptHuffmanError("component references missing quant table");
        return *t;
    }
};

namespace jpegdetail {

// Annex K.1/K.2 base tables, natural order.
inline constexpr std::array<int, 64> kBaseLuma = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

inline constexpr std::array<int, 64> kBaseChroma = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

// Annex K.3 typical Huffman tables.
struct HuffSpec {
    std::array<uint8_t, 16> counts;
    std::vector<uint8_t> symbols;
};

inline const HuffSpec& dc_luma_spec() {
    static const HuffSpec s{{0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                            {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
    return s;
}
inline const HuffSpec& dc_chroma_spec() {
    static const HuffSpec s{{0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
                            {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
    return s;
}
inline const HuffSpec& ac_luma_spec() {
    static const HuffSpec s{
        {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
        {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41,
         0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91,
         0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24,
         0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a,
         0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38,
         0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53,
         0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66,
         0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79,
         0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93,
         0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5,
         0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7,
         0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9,
         0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1,
         0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2,
         0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};
    return s;
}
inline const HuffSpec& ac_chroma_spec() {
    static const HuffSpec s{
        {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
        {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12,
         0x41, 0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14,
         0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09, 0x23, 0x33, 0x52, 0xf0, 0x15,
         0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25, 0xf1, 0x17,
         0x18, 0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37,
         0x38, 0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a,
         0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65,
         0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78,
         0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a,
         0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3,
         0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5,
         0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7,
         0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9,
         0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2,
         0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};
    return s;
}

// Canonical decode tables per T.81 F.2.2.3.
struct HuffDecoder {
    std::array<int32_t, 17> mincode{}, maxcode{};
    std::array<int, 17> valptr{};
    std::vector<uint8_t> symbols;
    bool valid = false;

    void build(const uint8_t counts[16], const uint8_t* syms, int nsyms) {
        symbols.assign(syms, syms + nsyms);
        int code = 0, k = 0;
        for (int len = 1; len <= 16; ++len) {
            valptr[len] = k;
            mincode[len] = code;
            code += counts[len - 1];
            k += counts[len - 1];
            maxcode[len] = code - 1;
            if (counts[len - 1] == 0) maxcode[len] = -1;
            code <<= 1;
        }
        valid = true;
    }
};

class BitReader {
public:
    BitReader(std::span<const uint8_t> data, size_t pos)
        : data_(data), pos_(pos) {}

    int read_bit() {
        if (cnt_ == 0) fill();
        int bit = (cur_ >> 7) & 1;
        cur_ <<= 1;
        --cnt_;
        return bit;
    }
    int read_bits(int n) {
        int v = 0;
        for (int i = 0; i < n; ++i) v = (v << 1) | read_bit();
        return v;
    }
    // Discards partial byte, consumes an expected RST marker.
    void sync_restart() {
        cnt_ = 0;
        while (pos_ + 1 < data_.size() &&
               !(data_[pos_] == 0xFF && data_[pos_ + 1] >= 0xD0 &&
                 data_[pos_ + 1] <= 0xD7))
            ++pos_;
        if (pos_ + 1 >= data_.size())
            throw TruncatedStreamError("missing restart marker");
        pos_ += 2;
    }
    size_t pos() const { return pos_; }

private:
    void fill() {
        if (pos_ >= data_.size())
            throw TruncatedStreamError("entropy data ends mid-block");
        uint8_t b = data_[pos_++];
        if (b == 0xFF) {
            if (pos_ >= data_.size())
                throw TruncatedStreamError("stray 0xFF at end of stream");
            uint8_t nxt = data_[pos_];
            if (nxt == 0x00) {
                ++pos_;  // stuffed byte
            } else {
                throw CorruptHuffmanError("marker inside entropy data");
            }
        }
        cur_ = b;
        cnt_ = 8;
    }

    std::span<const uint8_t> data_;
    size_t pos_;
    uint8_t cur_ = 0;
    int cnt_ = 0;
};

inline int huff_decode(BitReader& br, const HuffDecoder& h) {
    if (!h.valid) throw CorruptHuffmanError("scan uses undefined Huffman table");
    int code = 0;
    for (int len = 1; len <= 16; ++len) {
        code = (code << 1) | br.read_bit();
        if (h.maxcode[len] >= 0 && code <= h.maxcode[len])
            return h.symbols[h.valptr[len] + code - h.mincode[len]];
    }
    throw CorruptHuffmanError("invalid Huffman code");
}

// T.81 F.2.2.1 EXTEND
inline int extend(int v, int t) {
    if (t == 0) return 0;
    return v < (1 << (t - 1)) ? v - (1 << t) + 1 : v;
}

class BitWriter {
public:
    explicit BitWriter(std::vector<uint8_t>& out) : out_(out) {}

    void put(int code, int len) {
        for (int i = len - 1; i >= 0; --i) {
            cur_ = (cur_ << 1) | ((code >> i) & 1);
            if (++cnt_ == 8) flush_byte();
        }
    }
    void pad_to_byte() {  // 1-fill per T.81 F.1.2.3
        while (cnt_ != 0) put(1, 1);
    }

private:
    void flush_byte() {
        out_.push_back(cur_);
        if (cur_ == 0xFF) out_.push_back(0x00);
        cur_ = 0;
        cnt_ = 0;
    }
    std::vector<uint8_t>& out_;
    uint8_t cur_ = 0;
    int cnt_ = 0;
};

// canonical (code,length) per symbol for encoding
struct HuffEncoder {
    std::array<uint16_t, 256> code{};
    std::array<uint8_t, 256> size{};

    explicit HuffEncoder(const HuffSpec& spec) {
        int c = 0, k = 0;
        for (int len = 1; len <= 16; ++len) {
            for (int i = 0; i < spec.counts[len - 1]; ++i) {
                code[spec.symbols[k]] = static_cast<uint16_t>(c);
                size[spec.symbols[k]] = static_cast<uint8_t>(len);
                ++c;
                ++k;
            }
            c <<= 1;
        }
    }
};

inline int bit_category(int v) {
    int a = v < 0 ? -v : v, n = 0;
    while (a) {
        a >>= 1;
        ++n;
    }
    return n;
}

}  // namespace jpegdetail

// IJG quality scaling, integer arithmetic exactly as commonly implemented:
// scale = qf<50 ? 5000/qf : 200-2*qf;  q = clamp((base*scale+50)/100, 1, 255).
inline QuantTable scale_quant_table(const std::array<int, 64>& base_natural,
                                    int qf, int id) {
    if (qf < 1 || qf > 100) throw InvalidQfError("quality factor must be 1..100");
    int scale = qf < 50 ? 5000 / qf : 200 - 2 * qf;
    QuantTable t;
    t.id = id;
    for (int i = 0; i < 64; ++i) {
        int q = (base_natural[kZigzag[i]] * scale + 50) / 100;
        t.entries[i] = std::clamp(q, 1, 255);
    }
    return t;
}

inline QuantTable luma_quant_table(int qf) {
    return scale_quant_table(jpegdetail::kBaseLuma, qf, 0);
}
inline QuantTable chroma_quant_table(int qf) {
    return scale_quant_table(jpegdetail::kBaseChroma, qf, 1);
}

// ---------------------------------------------------------------- parsing

inline CoefficientImage parse_jpeg(std::span<const uint8_t> data) {
    using namespace jpegdetail;
    auto need = [&](size_t pos, size_t n) {
        if (pos + n > data.size())
            throw TruncatedStreamError("unexpected end of stream");
    };
    auto u16 = [&](size_t pos) {
        need(pos, 2);
        return (static_cast<int>(data[pos]) << 8) | data[pos + 1];
    };

    need(0, 2);
    if (data[0] != 0xFF || data[1] != 0xD8)
        throw UnsupportedMarkerError("missing SOI, not a JPEG stream");

    CoefficientImage ci;
    std::array<HuffDecoder, 4> dc_tab, ac_tab;
    int restart_interval = 0;
    bool have_sof = false;
    size_t pos = 2;

    for (;;) {
        need(pos, 2);
        if (data[pos] != 0xFF)
            throw CorruptHuffmanError("expected marker, got raw byte");
        uint8_t m = data[pos + 1];
        pos += 2;
        if (m == 0xFF) {  // fill byte
            --pos;
            continue;
        }
        if (m == 0xD9) throw TruncatedStreamError("EOI before scan data");
        if (m == 0x01 || (m >= 0xD0 && m <= 0xD7)) continue;  // no payload

        int len = u16(pos);
        if (len < 2) throw TruncatedStreamError("bad segment length");
        need(pos, static_cast<size_t>(len));
        std::span<const uint8_t> seg = data.subspan(pos + 2, len - 2);
        size_t seg_end = pos + len;

        switch (m) {
            case 0xC0: {  // SOF0 baseline
                if (seg.size() < 6 || seg[0] != 8)
                    throw UnsupportedMarkerError("only 8-bit baseline JPEG supported");
                ci.height = (seg[1] << 8) | seg[2];
                ci.width = (seg[3] << 8) | seg[4];
                int nc = seg[5];
                if (nc != 1 && nc != 3)
                    throw UnsupportedMarkerError("only 1 or 3 components supported");
                if (seg.size() < static_cast<size_t>(6 + 3 * nc))
                    throw TruncatedStreamError("short SOF segment");
                for (int c = 0; c < nc; ++c) {
                    Component comp;
                    comp.id = seg[6 + 3 * c];
                    comp.h = seg[7 + 3 * c] >> 4;
                    comp.v = seg[7 + 3 * c] & 15;
                    comp.quant_table_id = seg[8 + 3 * c];
                    if (comp.h < 1 || comp.h > 4 || comp.v < 1 || comp.v > 4)
                        throw UnsupportedMarkerError("bad sampling factors");
                    ci.components.push_back(comp);
                }
                have_sof = true;
                break;
            }
            case 0xC1:
            case 0xC2:
            case 0xC3:
            case 0xC5:
            case 0xC6:
            case 0xC7:
            case 0xC9:
            case 0xCA:
            case 0xCB:
            case 0xCD:
            case 0xCE:
            case 0xCF:
                throw UnsupportedMarkerError(
                    "progressive/extended/arithmetic JPEG not supported");
            case 0xCC:
                throw UnsupportedMarkerError("arithmetic coding not supported");
            case 0xDB: {  // DQT
                size_t i = 0;
                while (i < seg.size()) {
                    int pq = seg[i] >> 4, tq = seg[i] & 15;
                    if (pq != 0)
                        throw UnsupportedMarkerError("16-bit quant tables not baseline");
                    if (tq > 3 || i + 65 > seg.size())
                        throw TruncatedStreamError("bad DQT segment");
                    QuantTable t;
                    t.id = tq;
                    for (int k = 0; k < 64; ++k) t.entries[k] = seg[i + 1 + k];
                    ci.tables[tq] = t;
                    i += 65;
                }
                break;
            }
            case 0xC4: {  // DHT
                size_t i = 0;
                while (i + 17 <= seg.size()) {
                    int tc = seg[i] >> 4, th = seg[i] & 15;
                    if (tc > 1 || th > 3)
                        throw CorruptHuffmanError("bad DHT class/slot");
                    int total = 0;
                    for (int k = 0; k < 16; ++k) total += seg[i + 1 + k];
                    if (i + 17 + total > seg.size())
                        throw TruncatedStreamError("short DHT segment");
                    (tc == 0 ? dc_tab[th] : ac_tab[th])
                        .build(&seg[i + 1], &seg[i + 17], total);
                    i += 17 + static_cast<size_t>(total);
                }
                break;
            }
            case 0xDD:
                if (seg.size() < 2) throw TruncatedStreamError("short DRI");
                restart_interval = (seg[0] << 8) | seg[1];
                break;
            case 0xDA: {  // SOS: decode the single baseline scan
                if (!have_sof)
                    throw UnsupportedMarkerError("SOS before SOF");
                int ns = seg[0];
                if (ns != static_cast<int>(ci.components.size()))
                    throw UnsupportedMarkerError("multi-scan streams not supported");
                struct ScanComp {
                    Component* comp;
                    int dc, ac;
                };
                std::vector<ScanComp> scan;
                for (int c = 0; c < ns; ++c) {
                    int cs = seg[1 + 2 * c];
                    int t = seg[2 + 2 * c];
                    Component* found = nullptr;
                    for (auto& comp : ci.components)
                        if (comp.id == cs) found = &comp;
                    if (!found)
                        throw CorruptHuffmanError("scan references unknown component");
                    scan.push_back({found, t >> 4, t & 15});
                }
                int ss = seg[1 + 2 * ns], se = seg[2 + 2 * ns],
                    a = seg[3 + 2 * ns];
                if (ss != 0 || se != 63 || a != 0)
                    throw UnsupportedMarkerError("non-baseline spectral selection");

                int hmax = 1, vmax = 1;
                for (const auto& c : ci.components) {
                    hmax = std::max(hmax, c.h);
                    vmax = std::max(vmax, c.v);
                }
                int mcux = (ci.width + 8 * hmax - 1) / (8 * hmax);
                int mcuy = (ci.height + 8 * vmax - 1) / (8 * vmax);
                struct Grid {
                    int gw, gh;
                    std::vector<std::array<int, 64>> blocks;
                    int pred = 0;
                };
                std::vector<Grid> grids(ci.components.size());
                for (size_t c = 0; c < ci.components.size(); ++c) {
                    auto& comp = ci.components[c];
                    comp.width = (ci.width * comp.h + hmax - 1) / hmax;
                    comp.height = (ci.height * comp.v + vmax - 1) / vmax;
                    comp.bw = (comp.width + 7) / 8;
                    comp.bh = (comp.height + 7) / 8;
                    grids[c].gw = mcux * comp.h;
                    grids[c].gh = mcuy * comp.v;
                    grids[c].blocks.assign(
                        static_cast<size_t>(grids[c].gw) * grids[c].gh, {});
                }

                BitReader br(data, seg_end);
                long nmcu = 0;
                for (int my = 0; my < mcuy; ++my)
                    for (int mx = 0; mx < mcux; ++mx) {
                        if (restart_interval && nmcu &&
                            nmcu % restart_interval == 0) {
                            br.sync_restart();
                            for (auto& g : grids) g.pred = 0;
                        }
                        ++nmcu;
                        for (size_t c = 0; c < scan.size(); ++c) {
                            const auto& sc = scan[c];
                            size_t gi = sc.comp - ci.components.data();
                            Grid& g = grids[gi];
                            for (int v = 0; v < sc.comp->v; ++v)
                                for (int h = 0; h < sc.comp->h; ++h) {
                                    std::array<int, 64> blk{};
                                    int t = huff_decode(br, dc_tab[sc.dc]);
                                    if (t > 11)
                                        throw CorruptHuffmanError("bad DC category");
                                    g.pred += extend(br.read_bits(t), t);
                                    blk[0] = g.pred;
                                    for (int k = 1; k < 64;) {
                                        int rs = huff_decode(br, ac_tab[sc.ac]);
                                        int r = rs >> 4, s = rs & 15;
                                        if (s == 0) {
                                            if (r != 15) break;  // EOB
                                            k += 16;
                                            continue;
                                        }
                                        k += r;
                                        if (k > 63)
                                            throw CorruptHuffmanError(
                                                "AC run past end of block");
                                        blk[k++] = extend(br.read_bits(s), s);
                                    }
                                    int bx = mx * sc.comp->h + h;
                                    int by = my * sc.comp->v + v;
                                    g.blocks[static_cast<size_t>(by) * g.gw + bx] =
                                        blk;
                                }
                        }
                    }

                // keep only the ceil(dim/8) real blocks, drop MCU padding
                for (size_t c = 0; c < ci.components.size(); ++c) {
                    auto& comp = ci.components[c];
                    comp.blocks.assign(
                        static_cast<size_t>(comp.bw) * comp.bh, {});
                    for (int by = 0; by < comp.bh; ++by)
                        for (int bx = 0; bx < comp.bw; ++bx)
                            comp.block(bx, by) =
                                grids[c].blocks[static_cast<size_t>(by) *
                                                    grids[c].gw +
                                                bx];
                }
                for (const auto& comp : ci.components)
                    ci.table_for(comp);  // validate table references
                return ci;
            }
            case 0xDC:  // DNL
            default:
                break;  // APPn / COM / unknown: skip
        }
        pos = seg_end;
    }
}

// --------------------------------------------------------------- encoding

// Quantized coefficients of one padded plane (the encoder's view of it).
inline void quantize_plane(const PixelImage& plane, const QuantTable& table,
                           Component& comp) {
    BlockGrid grid = extract_blocks(plane);
    comp.width = plane.width;
    comp.height = plane.height;
    comp.bw = grid.bw;
    comp.bh = grid.bh;
    comp.blocks.assign(static_cast<size_t>(grid.bw) * grid.bh, {});
    for (int by = 0; by < grid.bh; ++by)
        for (int bx = 0; bx < grid.bw; ++bx) {
            Block b = grid.at(bx, by);
            for (double& v : b) v -= 128.0;
            Block f = dct2d(b);
            auto& out = comp.block(bx, by);
            for (int i = 0; i < 64; ++i)
                out[i] = static_cast<int>(
                    quantize(f[kZigzag[i]], table.step_zz(i)));
        }
}

// Pixel image -> coefficient representation at the given quality factor.
// Color images are coded as YCbCr 4:4:4.
inline CoefficientImage encode_coefficients(const PixelImage& img, int qf) {
    if (img.width < 1 || img.height < 1)
        throw GeometryMismatchError("empty image");
    CoefficientImage ci;
    ci.width = img.width;
    ci.height = img.height;
    ci.tables[0] = luma_quant_table(qf);
    int nc = img.channels;
    if (nc != 1) ci.tables[1] = chroma_quant_table(qf);

    std::vector<PixelImage> planes;
    if (nc == 1) {
        planes.push_back(img);
    } else {
        PixelImage y(img.width, img.height), cb(img.width, img.height),
            cr(img.width, img.height);
        for (int j = 0; j < img.height; ++j)
            for (int i = 0; i < img.width; ++i)
                rgb_to_ycbcr(img.at(i, j, 0), img.at(i, j, 1), img.at(i, j, 2),
                             y.at(i, j), cb.at(i, j), cr.at(i, j));
        planes = {std::move(y), std::move(cb), std::move(cr)};
    }
    for (int c = 0; c < (nc == 1 ? 1 : 3); ++c) {
        Component comp;
        comp.id = c + 1;
        comp.h = comp.v = 1;
        comp.quant_table_id = (c == 0) ? 0 : 1;
        quantize_plane(planes[c], *ci.tables[comp.quant_table_id], comp);
        ci.components.push_back(std::move(comp));
    }
    return ci;
}

// Serializes a coefficient image as a baseline JFIF stream with the
// typical Annex K Huffman tables. Only 4:4:4 / single-component layouts
// (what encode_coefficients produces) are supported.
inline std::vector<uint8_t> emit_jpeg(const CoefficientImage& ci) {
    using namespace jpegdetail;
    for (const auto& c : ci.components)
        if (c.h != 1 || c.v != 1)
            throw UnsupportedMarkerError("emit supports 4:4:4 layouts only");

    std::vector<uint8_t> out;
    auto byte = [&](int v) { out.push_back(static_cast<uint8_t>(v)); };
    auto word = [&](int v) {
        byte((v >> 8) & 0xFF);
        byte(v & 0xFF);
    };
    auto marker = [&](int m) {
        byte(0xFF);
        byte(m);
    };

    marker(0xD8);
    marker(0xE0);  // APP0 / JFIF 1.1
    word(16);
    const char jfif[5] = {'J', 'F', 'I', 'F', 0};
    for (char ch : jfif) byte(ch);
    byte(1);
    byte(1);
    byte(0);  // no density units
    word(1);
    word(1);
    byte(0);
    byte(0);

    for (const auto& t : ci.tables)
        if (t) {
            marker(0xDB);
            word(2 + 65);
            byte(t->id);
            for (int v : t->entries) byte(v);
        }

    marker(0xC0);
    word(8 + 3 * static_cast<int>(ci.components.size()));
    byte(8);
    word(ci.height);
    word(ci.width);
    byte(static_cast<int>(ci.components.size()));
    for (const auto& c : ci.components) {
        byte(c.id);
        byte((c.h << 4) | c.v);
        byte(c.quant_table_id);
    }

    bool color = ci.components.size() > 1;
    auto emit_dht = [&](int tc, int th, const HuffSpec& spec) {
        marker(0xC4);
        word(2 + 1 + 16 + static_cast<int>(spec.symbols.size()));
        byte((tc << 4) | th);
        for (int v : spec.counts) byte(v);
        for (int v : spec.symbols) byte(v);
    };
    emit_dht(0, 0, dc_luma_spec());
    emit_dht(1, 0, ac_luma_spec());
    if (color) {
        emit_dht(0, 1, dc_chroma_spec());
        emit_dht(1, 1, ac_chroma_spec());
    }

    marker(0xDA);
    word(6 + 2 * static_cast<int>(ci.components.size()));
    byte(static_cast<int>(ci.components.size()));
    for (const auto& c : ci.components) {
        byte(c.id);
        int slot = (c.id == 1) ? 0 : 1;
        byte((slot << 4) | slot);
    }
    byte(0);
    byte(63);
    byte(0);

    HuffEncoder dc_l(dc_luma_spec()), ac_l(ac_luma_spec());
    HuffEncoder dc_c(dc_chroma_spec()), ac_c(ac_chroma_spec());
    BitWriter bw(out);
    std::vector<int> pred(ci.components.size(), 0);

    // 4:4:4 interleaved: every component contributes one block per MCU
    int bw_blocks = ci.components[0].bw, bh_blocks = ci.components[0].bh;
    for (int by = 0; by < bh_blocks; ++by)
        for (int bx = 0; bx < bw_blocks; ++bx)
            for (size_t c = 0; c < ci.components.size(); ++c) {
                const auto& dc = (c == 0) ? dc_l : dc_c;
                const auto& ac = (c == 0) ? ac_l : ac_c;
                const auto& blk = ci.components[c].block(bx, by);
                int diff = blk[0] - pred[c];
                pred[c] = blk[0];
                int t = bit_category(diff);
                bw.put(dc.code[t], dc.size[t]);
                if (t) bw.put(diff < 0 ? diff + (1 << t) - 1 : diff, t);
                int run = 0;
                for (int k = 1; k < 64; ++k) {
                    if (blk[k] == 0) {
                        ++run;
                        continue;
                    }
                    while (run > 15) {
                        bw.put(ac.code[0xF0], ac.size[0xF0]);
                        run -= 16;
                    }
                    int s = bit_category(blk[k]);
                    int rs = (run << 4) | s;
                    bw.put(ac.code[rs], ac.size[rs]);
                    bw.put(blk[k] < 0 ? blk[k] + (1 << s) - 1 : blk[k], s);
                    run = 0;
                }
                if (run) bw.put(ac.code[0x00], ac.size[0x00]);
            }
    bw.pad_to_byte();
    marker(0xD9);
    return out;
}

inline std::vector<uint8_t> encode_jpeg(const PixelImage& img, int qf) {
    return emit_jpeg(encode_coefficients(img, qf));
}

// --------------------------------------------------------------- decoding

// Dequantize + inverse transform one component onto its padded block
// canvas (bw*8 x bh*8), +128 level shift, no clamping.
inline PixelImage decode_component_plane(const Component& comp,
                                         const QuantTable& table) {
    PixelImage plane(comp.bw * 8, comp.bh * 8);
    for (int by = 0; by < comp.bh; ++by)
        for (int bx = 0; bx < comp.bw; ++bx) {
            const auto& gamma = comp.block(bx, by);
            Block f{};
            for (int i = 0; i < 64; ++i)
                f[kZigzag[i]] = dequantize(gamma[i], table.step_zz(i));
            Block s = idct2d(f);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    plane.at(bx * 8 + x, by * 8 + y) = s[y * 8 + x] + 128.0;
        }
    return plane;
}

inline PixelImage crop(const PixelImage& img, int w, int h) {
    PixelImage out(w, h, img.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = img.at(x, y, c);
    return out;
}

// Standard reconstruction: interval centers, inverse DCT, level shift,
// chroma replication upsample + color conversion, clamp to [0,255].
inline PixelImage hard_decode(const CoefficientImage& ci) {
    std::vector<PixelImage> planes;
    for (const auto& comp : ci.components)
        planes.push_back(
            crop(decode_component_plane(comp, ci.table_for(comp)),
                 comp.width, comp.height));

    PixelImage out;
    if (ci.components.size() == 1) {
        out = std::move(planes[0]);
        out = crop(out, ci.width, ci.height);
        for (double& v : out.samples) v = std::clamp(v, 0.0, 255.0);
        return out;
    }
    out = PixelImage(ci.width, ci.height, 3);
    for (int j = 0; j < ci.height; ++j)
        for (int i = 0; i < ci.width; ++i) {
            auto sample = [&](int c) {
                const auto& comp = ci.components[c];
                int sx = std::min(i * comp.width / ci.width, comp.width - 1);
                int sy = std::min(j * comp.height / ci.height, comp.height - 1);
                return planes[c].at(sx, sy);
            };
            double r, g, b;
            ycbcr_to_rgb(sample(0), sample(1), sample(2), r, g, b);
            out.at(i, j, 0) = std::clamp(r, 0.0, 255.0);
            out.at(i, j, 1) = std::clamp(g, 0.0, 255.0);
            out.at(i, j, 2) = std::clamp(b, 0.0, 255.0);
        }
    return out;
}

}  // namespace jsd
