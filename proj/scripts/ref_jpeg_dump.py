#!/usr/bin/env python3
"""Independent reference dump of baseline JPEG DCT coefficients.

A deliberately simple, bit-by-bit baseline JPEG (SOF0) decoder used only to
produce reference data for the C++ codec tests. It shares no code with the
library. Output format (text):

    width height ncomp
    per component: id h v tq bw bh        (bw,bh = ceil(comp_dim/8))
    TABLE tq: 64 ints (zig-zag order)
    COMP c bx by: 64 ints (zig-zag order, DC prediction undone)

Usage: ref_jpeg_dump.py in.jpg out.txt
"""

import sys


class BitReader:
    def __init__(self, data, pos):
        self.d = data
        self.pos = pos
        self.bit = 0

    def align(self):
        self.bit = 0

    def read_bit(self):
        b = self.d[self.pos]
        if b == 0xFF:
            nxt = self.d[self.pos + 1]
            if nxt != 0x00:
                raise ValueError("marker inside entropy data: %02x" % nxt)
        v = (b >> (7 - self.bit)) & 1
        self.bit += 1
        if self.bit == 8:
            self.bit = 0
            self.pos += 1
            if b == 0xFF:  # skip stuffed 0x00
                self.pos += 1
        return v

    def read_bits(self, n):
        v = 0
        for _ in range(n):
            v = (v << 1) | self.read_bit()
        return v

    def skip_to_marker(self):
        self.align()
        while self.d[self.pos] != 0xFF or self.d[self.pos + 1] == 0x00:
            self.pos += 1
        m = self.d[self.pos + 1]
        self.pos += 2
        return m


class Huff:
    def __init__(self, counts, symbols):
        self.lut = {}  # (length, code) -> symbol
        code = 0
        k = 0
        for ln in range(1, 17):
            for _ in range(counts[ln - 1]):
                self.lut[(ln, code)] = symbols[k]
                code += 1
                k += 1
            code <<= 1

    def decode(self, br):
        code = 0
        for ln in range(1, 17):
            code = (code << 1) | br.read_bit()
            if (ln, code) in self.lut:
                return self.lut[(ln, code)]
        raise ValueError("bad huffman code")


def extend(v, t):
    if t == 0:
        return 0
    return v if v >= (1 << (t - 1)) else v - (1 << t) + 1


def decode(data):
    assert data[0] == 0xFF and data[1] == 0xD8, "not a JPEG"
    pos = 2
    qt = {}
    hdc = {}
    hac = {}
    comps = []
    W = H = 0
    restart = 0
    while True:
        assert data[pos] == 0xFF
        m = data[pos + 1]
        pos += 2
        if m == 0xD9:
            break
        L = (data[pos] << 8) | data[pos + 1]
        seg = data[pos + 2:pos + L]
        if m == 0xDB:
            i = 0
            while i < len(seg):
                pq, tq = seg[i] >> 4, seg[i] & 15
                i += 1
                assert pq == 0, "16-bit quant tables unsupported"
                qt[tq] = list(seg[i:i + 64])
                i += 64
        elif m == 0xC4:
            i = 0
            while i < len(seg):
                tc, th = seg[i] >> 4, seg[i] & 15
                counts = list(seg[i + 1:i + 17])
                n = sum(counts)
                syms = list(seg[i + 17:i + 17 + n])
                (hdc if tc == 0 else hac)[th] = Huff(counts, syms)
                i += 17 + n
        elif m == 0xC0:
            assert seg[0] == 8, "only 8-bit precision"
            H = (seg[1] << 8) | seg[2]
            W = (seg[3] << 8) | seg[4]
            nc = seg[5]
            for c in range(nc):
                cid = seg[6 + 3 * c]
                hv = seg[7 + 3 * c]
                comps.append(dict(id=cid, h=hv >> 4, v=hv & 15,
                                  tq=seg[8 + 3 * c]))
        elif m in (0xC1, 0xC2, 0xC3, 0xC5, 0xC6, 0xC7,
                   0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF):
            raise ValueError("non-baseline SOF: %02x" % m)
        elif m == 0xDD:
            restart = (seg[0] << 8) | seg[1]
        elif m == 0xDA:
            ns = seg[0]
            scan = []
            for c in range(ns):
                cs = seg[1 + 2 * c]
                t = seg[2 + 2 * c]
                comp = next(x for x in comps if x["id"] == cs)
                scan.append((comp, t >> 4, t & 15))
            pos = pos + L
            return decode_scan(data, pos, W, H, comps, scan,
                               hdc, hac, qt, restart)
        pos += L
    raise ValueError("no scan found")


def decode_scan(data, pos, W, H, comps, scan, hdc, hac, qt, restart):
    hmax = max(c["h"] for c in comps)
    vmax = max(c["v"] for c in comps)
    mcux = (W + 8 * hmax - 1) // (8 * hmax)
    mcuy = (H + 8 * vmax - 1) // (8 * vmax)
    for c in comps:
        cw = (W * c["h"] + hmax - 1) // hmax
        ch = (H * c["v"] + vmax - 1) // vmax
        c["bw"] = (cw + 7) // 8
        c["bh"] = (ch + 7) // 8
        c["gw"] = mcux * c["h"]  # MCU-padded grid
        c["gh"] = mcuy * c["v"]
        c["blocks"] = [[0] * 64 for _ in range(c["gw"] * c["gh"])]
        c["pred"] = 0
    br = BitReader(data, pos)
    nmcu = 0
    for my in range(mcuy):
        for mx in range(mcux):
            if restart and nmcu and nmcu % restart == 0:
                m = br.skip_to_marker()
                assert 0xD0 <= m <= 0xD7, "expected RST marker"
                for c in comps:
                    c["pred"] = 0
            nmcu += 1
            for comp, td, ta in scan:
                for v in range(comp["v"]):
                    for h in range(comp["h"]):
                        blk = [0] * 64
                        t = hdc[td].decode(br)
                        diff = extend(br.read_bits(t), t)
                        comp["pred"] += diff
                        blk[0] = comp["pred"]
                        k = 1
                        while k < 64:
                            rs = hac[ta].decode(br)
                            r, s = rs >> 4, rs & 15
                            if s == 0:
                                if r == 15:
                                    k += 16
                                    continue
                                break
                            k += r
                            blk[k] = extend(br.read_bits(s), s)
                            k += 1
                        bx = mx * comp["h"] + h
                        by = my * comp["v"] + v
                        comp["blocks"][by * comp["gw"] + bx] = blk
    return W, H, comps, qt


def main():
    inp, outp = sys.argv[1], sys.argv[2]
    data = open(inp, "rb").read()
    W, H, comps, qt = decode(data)
    with open(outp, "w") as f:
        f.write("%d %d %d\n" % (W, H, len(comps)))
        for c in comps:
            f.write("%d %d %d %d %d %d\n"
                    % (c["id"], c["h"], c["v"], c["tq"], c["bw"], c["bh"]))
        for tq in sorted(qt):
            f.write("TABLE %d %s\n" % (tq, " ".join(map(str, qt[tq]))))
        for ci, c in enumerate(comps):
            for by in range(c["bh"]):
                for bx in range(c["bw"]):
                    blk = c["blocks"][by * c["gw"] + bx]
                    f.write("COMP %d %d %d %s\n"
                            % (ci, bx, by, " ".join(map(str, blk))))


if __name__ == "__main__":
    main()
