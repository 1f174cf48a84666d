use super::huffman::{HuffmanTable, TableClass};
use super::quant::QuantTable;
use super::zigzag::ZIGZAG_TO_NATURAL;
use super::{CoeffImage, DctBlock, COEFF_MAX, COEFF_MIN};
use crate::error::{Error, Result};

const SOI: u8 = 0xD8;
const EOI: u8 = 0xD9;
const SOS: u8 = 0xDA;
const DQT: u8 = 0xDB;
const DHT: u8 = 0xC4;
const DRI: u8 = 0xDD;
const DAC: u8 = 0xCC;

#[derive(Clone, Debug)]
struct FrameComponent {
    id: u8,
    h: usize,
    v: usize,
    tq: usize,
}

#[derive(Debug)]
struct Frame {
    width: u32,
    height: u32,
    components: Vec<FrameComponent>,
    h_max: usize,
    v_max: usize,
}

impl Frame {
    fn mcus(&self) -> (usize, usize) {
        (
            (self.width as usize).div_ceil(8 * self.h_max),
            (self.height as usize).div_ceil(8 * self.v_max),
        )
    }

    /// Blocks covering the component's own (subsampled) extent.
    fn component_blocks(&self, c: &FrameComponent) -> (usize, usize) {
        let w = (self.width as usize * c.h).div_ceil(self.h_max);
        let h = (self.height as usize * c.v).div_ceil(self.v_max);
        (w.div_ceil(8), h.div_ceil(8))
    }
}

struct Parser<'a> {
    data: &'a [u8],
    pos: usize,
    qtables: [Option<QuantTable>; 4],
    dc_tables: [Option<HuffmanTable>; 4],
    ac_tables: [Option<HuffmanTable>; 4],
    restart_interval: usize,
    frame: Option<Frame>,
    luma: Option<Vec<DctBlock>>,
    luma_quant: Option<QuantTable>,
    scans: usize,
}

/// Reads the quantized luminance coefficients of a baseline JPEG.
///
/// Chroma components are entropy-decoded for validation and discarded.
pub fn parse_jpeg(bytes: &[u8]) -> Result<CoeffImage> {
    if bytes.len() < 2 || bytes[0] != 0xFF || bytes[1] != SOI {
        return Err(Error::parse(0, "missing SOI"));
    }
    let mut p = Parser {
        data: bytes,
        pos: 2,
        qtables: Default::default(),
        dc_tables: Default::default(),
        ac_tables: Default::default(),
        restart_interval: 0,
        frame: None,
        luma: None,
        luma_quant: None,
        scans: 0,
    };
    p.run()
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::parse(offset, msg))
    }

    fn u8_at(&self, at: usize) -> Result<u8> {
        self.data
            .get(at)
            .copied()
            .ok_or_else(|| Error::parse(at, "truncated stream"))
    }

    fn u16_at(&self, at: usize) -> Result<u16> {
        Ok(u16::from(self.u8_at(at)?) << 8 | u16::from(self.u8_at(at + 1)?))
    }

    fn next_marker(&mut self) -> Result<u8> {
        let start = self.pos;
        if self.u8_at(self.pos)? != 0xFF {
            return self.err(start, "expected marker");
        }
        while self.u8_at(self.pos)? == 0xFF {
            self.pos += 1;
        }
        let m = self.u8_at(self.pos)?;
        self.pos += 1;
        Ok(m)
    }

    /// Returns the payload range of the segment starting at `self.pos` and skips it.
    fn segment(&mut self) -> Result<(usize, usize)> {
        let len = self.u16_at(self.pos)? as usize;
        if len < 2 {
            return self.err(self.pos, format!("segment length {len} too small"));
        }
        let start = self.pos + 2;
        let end = self.pos + len;
        if end > self.data.len() {
            return self.err(self.pos, "truncated stream: segment runs past end of data");
        }
        self.pos = end;
        Ok((start, end))
    }

    fn run(&mut self) -> Result<CoeffImage> {
        loop {
            let marker_at = self.pos;
            let m = self.next_marker()?;
            match m {
                SOI => return self.err(marker_at, "duplicate SOI"),
                EOI => break,
                0xC0 | 0xC1 => {
                    let (s, e) = self.segment()?;
                    self.read_frame(marker_at, s, e)?;
                }
                0xC2 | 0xC6 | 0xCA | 0xCE => {
                    return self.err(marker_at, "progressive JPEG is not supported")
                }
                0xC3 | 0xC7 | 0xCB | 0xCF => {
                    return self.err(marker_at, "lossless JPEG is not supported")
                }
                0xC5 => return self.err(marker_at, "hierarchical JPEG is not supported"),
                0xC9 | DAC => return self.err(marker_at, "arithmetic coding is not supported"),
                DHT => {
                    let (s, e) = self.segment()?;
                    self.read_dht(s, e)?;
                }
                DQT => {
                    let (s, e) = self.segment()?;
                    self.read_dqt(s, e)?;
                }
                DRI => {
                    let (s, e) = self.segment()?;
                    if e - s != 2 {
                        return self.err(s, "DRI segment must hold 2 bytes");
                    }
                    self.restart_interval = self.u16_at(s)? as usize;
                }
                SOS => {
                    let (s, e) = self.segment()?;
                    self.read_scan(marker_at, s, e)?;
                }
                0xD0..=0xD7 => return self.err(marker_at, "restart marker outside scan"),
                0x01 => {}
                0xE0..=0xEF | 0xFE | 0xDC | 0xDE | 0xDF | 0xF0..=0xFD => {
                    self.segment()?;
                }
                other => return self.err(marker_at, format!("unexpected marker 0xFF{other:02X}")),
            }
        }
        let frame = match &self.frame {
            Some(f) => f,
            None => return self.err(self.pos, "missing SOF"),
        };
        if self.scans == 0 {
            return self.err(self.pos, "missing SOS");
        }
        let blocks = match self.luma.take() {
            Some(b) => b,
            None => return self.err(self.pos, "luminance component never scanned"),
        };
        let quant = self
            .luma_quant
            .clone()
            .ok_or_else(|| Error::parse(self.pos, "missing DQT for luminance"))?;
        let (bw, bh) = (
            frame.width.div_ceil(8) as usize,
            frame.height.div_ceil(8) as usize,
        );
        let (cw, _) = frame.component_blocks(&frame.components[0]);
        let mut out = Vec::with_capacity(bw * bh);
        for r in 0..bh {
            out.extend_from_slice(&blocks[r * cw..r * cw + bw]);
        }
        CoeffImage::new(frame.width, frame.height, out, quant)
    }

    fn read_frame(&mut self, at: usize, s: usize, e: usize) -> Result<()> {
        if self.frame.is_some() {
            return self.err(at, "duplicate SOF");
        }
        if e - s < 6 {
            return self.err(s, "SOF segment too short");
        }
        let precision = self.u8_at(s)?;
        if precision != 8 {
            return self.err(s, format!("{precision}-bit sample precision is not supported"));
        }
        let height = u32::from(self.u16_at(s + 1)?);
        let width = u32::from(self.u16_at(s + 3)?);
        let n = self.u8_at(s + 5)? as usize;
        if height == 0 {
            return self.err(s + 1, "DNL-defined height is not supported");
        }
        if width == 0 {
            return self.err(s + 3, "zero image width");
        }
        if n == 0 || e - s != 6 + 3 * n {
            return self.err(s + 5, "SOF component count inconsistent with segment length");
        }
        let mut components = Vec::with_capacity(n);
        for i in 0..n {
            let o = s + 6 + 3 * i;
            let id = self.u8_at(o)?;
            let hv = self.u8_at(o + 1)?;
            let tq = self.u8_at(o + 2)? as usize;
            let (h, v) = ((hv >> 4) as usize, (hv & 15) as usize);
            if !(1..=4).contains(&h) || !(1..=4).contains(&v) || tq > 3 {
                return self.err(o, "invalid component sampling or table selector");
            }
            if components.iter().any(|c: &FrameComponent| c.id == id) {
                return self.err(o, format!("duplicate component id {id}"));
            }
            components.push(FrameComponent { id, h, v, tq });
        }
        let h_max = components.iter().map(|c| c.h).max().unwrap_or(1);
        let v_max = components.iter().map(|c| c.v).max().unwrap_or(1);
        if components[0].h != h_max || components[0].v != v_max {
            return self.err(s + 7, "subsampled luminance component is not supported");
        }
        self.frame = Some(Frame {
            width,
            height,
            components,
            h_max,
            v_max,
        });
        Ok(())
    }

    fn read_dqt(&mut self, s: usize, e: usize) -> Result<()> {
        let mut o = s;
        while o < e {
            let pq_tq = self.u8_at(o)?;
            let (pq, tq) = (pq_tq >> 4, (pq_tq & 15) as usize);
            if pq != 0 {
                return self.err(o, "16-bit quantization tables are not supported");
            }
            if tq > 3 {
                return self.err(o, format!("quantization table slot {tq} > 3"));
            }
            if o + 65 > e {
                return self.err(o, "truncated DQT segment");
            }
            let mut steps = [0u16; 64];
            for k in 0..64 {
                steps[ZIGZAG_TO_NATURAL[k]] = u16::from(self.data[o + 1 + k]);
            }
            let table = QuantTable::new(steps, tq as u8).map_err(|e| Error::parse(o, e.to_string()))?;
            self.qtables[tq] = Some(table);
            o += 65;
        }
        Ok(())
    }

    fn read_dht(&mut self, s: usize, e: usize) -> Result<()> {
        let mut o = s;
        while o < e {
            let tc_th = self.u8_at(o)?;
            let (tc, th) = (tc_th >> 4, (tc_th & 15) as usize);
            if tc > 1 || th > 3 {
                return self.err(o, "invalid Huffman table class or slot");
            }
            if o + 17 > e {
                return self.err(o, "truncated DHT segment");
            }
            let mut counts = [0u8; 16];
            counts.copy_from_slice(&self.data[o + 1..o + 17]);
            let total: usize = counts.iter().map(|&c| c as usize).sum();
            if o + 17 + total > e {
                return self.err(o, "truncated DHT segment");
            }
            let symbols = self.data[o + 17..o + 17 + total].to_vec();
            let class = if tc == 0 { TableClass::Dc } else { TableClass::Ac };
            let table = HuffmanTable::new(class, counts, symbols)
                .map_err(|err| Error::parse(o, err.to_string()))?;
            if tc == 0 {
                self.dc_tables[th] = Some(table);
            } else {
                self.ac_tables[th] = Some(table);
            }
            o += 17 + total;
        }
        Ok(())
    }

    fn read_scan(&mut self, at: usize, s: usize, e: usize) -> Result<()> {
        let frame = match &self.frame {
            Some(f) => f,
            None => return self.err(at, "SOS before SOF"),
        };
        let ns = self.u8_at(s)? as usize;
        if ns == 0 || ns > 4 || e - s != 1 + 2 * ns + 3 {
            return self.err(s, "SOS component count inconsistent with segment length");
        }
        // (frame component index, dc table, ac table)
        let mut comps: Vec<(usize, &HuffmanTable, &HuffmanTable)> = Vec::with_capacity(ns);
        for i in 0..ns {
            let o = s + 1 + 2 * i;
            let id = self.u8_at(o)?;
            let sel = self.u8_at(o + 1)?;
            let idx = match frame.components.iter().position(|c| c.id == id) {
                Some(idx) => idx,
                None => return self.err(o, format!("scan references unknown component {id}")),
            };
            if comps.iter().any(|c| c.0 == idx) {
                return self.err(o, format!("component {id} repeated in scan"));
            }
            let (td, ta) = ((sel >> 4) as usize, (sel & 15) as usize);
            let dc = self.dc_tables.get(td).and_then(|t| t.as_ref());
            let ac = self.ac_tables.get(ta).and_then(|t| t.as_ref());
            match (dc, ac) {
                (Some(dc), Some(ac)) => comps.push((idx, dc, ac)),
                _ => return self.err(o, "scan references undefined Huffman table"),
            }
        }
        let o = s + 1 + 2 * ns;
        let (ss, se, ah_al) = (self.u8_at(o)?, self.u8_at(o + 1)?, self.u8_at(o + 2)?);
        if ss != 0 || se != 63 || ah_al != 0 {
            return self.err(o, "spectral selection or successive approximation in baseline scan");
        }
        let has_luma = comps.iter().any(|c| c.0 == 0);
        if has_luma {
            if self.luma.is_some() {
                return self.err(at, "luminance component scanned twice");
            }
            let tq = frame.components[0].tq;
            match &self.qtables[tq] {
                Some(q) => self.luma_quant = Some(q.clone()),
                None => return self.err(at, format!("luminance uses undefined quantization table {tq}")),
            }
        }

        let (cw, ch) = frame.component_blocks(&frame.components[0]);
        let (mcux, mcuy) = frame.mcus();
        let mut luma = has_luma.then(|| {
            let (lw, lh) = if ns == 1 { (cw, ch) } else { (mcux * frame.h_max, mcuy * frame.v_max) };
            (lw, vec![DctBlock::default(); lw * lh])
        });

        let mut reader = BitReader::new(self.data, e);
        let mut preds = vec![0i32; ns];
        let mut scratch = DctBlock::default();
        let total_mcus = if ns == 1 {
            let (w, h) = frame.component_blocks(&frame.components[comps[0].0]);
            w * h
        } else {
            mcux * mcuy
        };
        let units_per_row = if ns == 1 {
            frame.component_blocks(&frame.components[comps[0].0]).0
        } else {
            mcux
        };
        let mut next_rst = 0u8;
        for mcu in 0..total_mcus {
            if self.restart_interval > 0 && mcu > 0 && mcu % self.restart_interval == 0 {
                reader.restart(next_rst)?;
                next_rst = (next_rst + 1) & 7;
                preds.iter_mut().for_each(|p| *p = 0);
            }
            let (mx, my) = (mcu % units_per_row, mcu / units_per_row);
            for (ci, &(idx, dc, ac)) in comps.iter().enumerate() {
                let fc = &frame.components[idx];
                let (bh, bv) = if ns == 1 { (1, 1) } else { (fc.h, fc.v) };
                for by in 0..bv {
                    for bx in 0..bh {
                        let is_luma = idx == 0;
                        let block: &mut DctBlock = match (&mut luma, is_luma) {
                            (Some((lw, blocks)), true) => {
                                let (col, row) = (mx * bh + bx, my * bv + by);
                                &mut blocks[row * *lw + col]
                            }
                            _ => {
                                scratch.coeffs.fill(0);
                                &mut scratch
                            }
                        };
                        decode_block(&mut reader, dc, ac, &mut preds[ci], block, is_luma)?;
                    }
                }
            }
        }
        self.pos = reader.finish()?;
        self.scans += 1;
        if let Some((lw, blocks)) = luma {
            // Keep the component's own block grid; the MCU padding blocks are dropped.
            let mut grid = Vec::with_capacity(cw * ch);
            for r in 0..ch {
                grid.extend_from_slice(&blocks[r * lw..r * lw + cw]);
            }
            self.luma = Some(grid);
        }
        Ok(())
    }
}

fn decode_block(
    r: &mut BitReader,
    dc: &HuffmanTable,
    ac: &HuffmanTable,
    pred: &mut i32,
    block: &mut DctBlock,
    check_range: bool,
) -> Result<()> {
    let at = r.pos;
    let size = r.decode(dc)?;
    if size > 11 {
        return Err(Error::parse(at, format!("DC magnitude category {size} > 11")));
    }
    let diff = r.receive_extend(size)?;
    *pred += diff;
    if check_range && !(COEFF_MIN..=COEFF_MAX).contains(pred) {
        return Err(Error::parse(at, format!("DC coefficient {} overflows", *pred)));
    }
    block.coeffs[0] = *pred as i16;
    let mut k = 1;
    while k < 64 {
        let at = r.pos;
        let rs = r.decode(ac)?;
        let (run, size) = ((rs >> 4) as usize, rs & 15);
        if size == 0 {
            if run == 15 {
                k += 16;
                continue;
            }
            break;
        }
        k += run;
        if k > 63 {
            return Err(Error::parse(at, "AC run past end of block"));
        }
        if size > 10 {
            return Err(Error::parse(at, format!("AC magnitude category {size} > 10")));
        }
        let v = r.receive_extend(size)?;
        if check_range && !(COEFF_MIN..=COEFF_MAX).contains(&v) {
            return Err(Error::parse(at, format!("AC coefficient {v} overflows")));
        }
        block.coeffs[ZIGZAG_TO_NATURAL[k]] = v as i16;
        k += 1;
    }
    if k > 64 {
        return Err(Error::parse(r.pos, "zero run past end of block"));
    }
    Ok(())
}

/// Entropy-coded segment reader: removes byte stuffing and stops at markers.
struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    bits: u32,
    count: u32,
    marker: Option<(usize, u8, usize)>,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        Self {
            data,
            pos,
            bits: 0,
            count: 0,
            marker: None,
        }
    }

    fn fill_byte(&mut self) -> Result<()> {
        if self.marker.is_some() {
            return Err(Error::parse(self.pos, "truncated stream: entropy data ended early"));
        }
        let b = *self
            .data
            .get(self.pos)
            .ok_or_else(|| Error::parse(self.pos, "truncated stream: missing EOI"))?;
        if b == 0xFF {
            let mut n = self.pos + 1;
            while self.data.get(n) == Some(&0xFF) {
                n += 1;
            }
            match self.data.get(n) {
                Some(0x00) => {
                    self.pos = n + 1;
                }
                Some(&m) => {
                    self.marker = Some((self.pos, m, n + 1));
                    return Err(Error::parse(self.pos, "truncated stream: entropy data ended early"));
                }
                None => return Err(Error::parse(self.pos, "truncated stream: missing EOI")),
            }
        } else {
            self.pos += 1;
        }
        self.bits = (self.bits << 8) | u32::from(b);
        self.count += 8;
        Ok(())
    }

    fn bit(&mut self) -> Result<u32> {
        if self.count == 0 {
            self.fill_byte()?;
        }
        self.count -= 1;
        Ok((self.bits >> self.count) & 1)
    }

    fn receive(&mut self, n: u8) -> Result<u32> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }

    fn receive_extend(&mut self, size: u8) -> Result<i32> {
        if size == 0 {
            return Ok(0);
        }
        let v = self.receive(size)? as i32;
        Ok(if v < 1 << (size - 1) {
            v - (1 << size) + 1
        } else {
            v
        })
    }

    fn decode(&mut self, table: &HuffmanTable) -> Result<u8> {
        let at = self.pos;
        let mut code = 0i32;
        for len in 1..=16 {
            code = (code << 1) | self.bit()? as i32;
            if let Some(sym) = table.lookup(code, len) {
                return Ok(sym);
            }
        }
        Err(Error::parse(at, "invalid Huffman code"))
    }

    fn align(&mut self) {
        self.count = 0;
        self.bits = 0;
    }

    /// Locates the marker following the entropy data of the current interval.
    /// Returns (marker offset, marker code, offset after the marker).
    fn scan_marker(&mut self) -> Result<(usize, u8, usize)> {
        if let Some(m) = self.marker.take() {
            return Ok(m);
        }
        let at = self.pos;
        match (self.data.get(at), self.data.get(at + 1)) {
            (Some(0xFF), _) => {
                let mut n = at + 1;
                while self.data.get(n) == Some(&0xFF) {
                    n += 1;
                }
                match self.data.get(n) {
                    Some(&m) if m != 0 => Ok((at, m, n + 1)),
                    Some(_) => Err(Error::parse(at, "unexpected entropy data after scan")),
                    None => Err(Error::parse(at, "truncated stream: missing EOI")),
                }
            }
            (Some(_), _) => Err(Error::parse(at, "unexpected entropy data after scan")),
            (None, _) => Err(Error::parse(at, "truncated stream: missing EOI")),
        }
    }

    fn restart(&mut self, expected: u8) -> Result<()> {
        self.align();
        let (at, m, after) = self.scan_marker()?;
        if m != 0xD0 + expected {
            return Err(Error::parse(at, format!("expected RST{expected}, found 0xFF{m:02X}")));
        }
        self.pos = after;
        Ok(())
    }

    /// Byte offset of the marker that ends the scan.
    fn finish(mut self) -> Result<usize> {
        self.align();
        let (at, m, _) = self.scan_marker()?;
        if (0xD0..=0xD7).contains(&m) {
            return Err(Error::parse(at, "unexpected restart marker at end of scan"));
        }
        Ok(at)
    }
}
