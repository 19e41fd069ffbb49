//! Maximum-weight matching in general graphs over exact rationals.
//!
//! Primal-dual blossom method in the classic formulation: S/T labels grow
//! alternating trees from free vertices, tight edges between S-vertices
//! form blossoms, and dual adjustments pick the smallest of the four delta
//! candidates. Dual variables are `BigRational`, so every slack comparison
//! is exact and the returned matching is exactly optimal.
//!
//! The layout (endpoint arrays, blossom child/endpoint lists, the index
//! tricks for walking blossom cycles in either direction) follows the
//! widely used Galil/van-Rantwijk presentation of the algorithm.

use num::{Signed, Zero};

use crate::rational::Rat;

const NONE: usize = usize::MAX;

pub fn max_weight_matching(
    num_vertices: usize,
    edges: &[(usize, usize, Rat)],
) -> Vec<Option<usize>> {
    if num_vertices == 0 || edges.is_empty() {
        return vec![None; num_vertices];
    }
    let mut m = Matcher::new(num_vertices, edges);
    m.run();
    #[cfg(debug_assertions)]
    m.verify_optimum();
    m.mate.iter().map(|&p| if p == NONE { None } else { Some(m.endpoint[p]) }).collect()
}

struct Matcher {
    nvertex: usize,
    edges: Vec<(usize, usize)>,
    weight: Vec<Rat>,
    /// endpoint[p] = vertex at endpoint p; edge k owns endpoints 2k, 2k+1
    endpoint: Vec<usize>,
    /// neighbend[v] = endpoints pointing away from v
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossomendps: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Vec<usize>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<Rat>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl Matcher {
    fn new(num_vertices: usize, edge_list: &[(usize, usize, Rat)]) -> Self {
        let nvertex = num_vertices;
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut weight = Vec::with_capacity(edge_list.len());
        let mut endpoint = Vec::with_capacity(2 * edge_list.len());
        let mut neighbend = vec![Vec::new(); nvertex];
        for (k, (i, j, w)) in edge_list.iter().enumerate() {
            assert!(*i != *j && *i < nvertex && *j < nvertex, "bad edge ({i},{j})");
            edges.push((*i, *j));
            weight.push(w.clone());
            endpoint.push(*i);
            endpoint.push(*j);
            neighbend[*i].push(2 * k + 1);
            neighbend[*j].push(2 * k);
        }
        let maxweight = weight.iter().max().cloned().unwrap_or_else(Rat::zero);
        let maxweight = if maxweight.is_negative() { Rat::zero() } else { maxweight };
        let mut dualvar = vec![maxweight; nvertex];
        dualvar.extend(std::iter::repeat_with(Rat::zero).take(nvertex));
        Matcher {
            nvertex,
            edges,
            weight,
            endpoint,
            neighbend,
            mate: vec![NONE; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![NONE; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NONE; 2 * nvertex],
            blossomchilds: vec![Vec::new(); 2 * nvertex],
            blossomendps: vec![Vec::new(); 2 * nvertex],
            blossombase: (0..nvertex).chain(std::iter::repeat_n(NONE, nvertex)).collect(),
            bestedge: vec![NONE; 2 * nvertex],
            blossombestedges: vec![Vec::new(); 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; edge_list.len()],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: usize) -> Rat {
        let (i, j) = self.edges[k];
        &self.dualvar[i] + &self.dualvar[j] - &self.weight[k] - &self.weight[k]
    }

    fn blossom_leaves(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.nvertex {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                self.blossom_leaves(t, out);
            }
        }
    }

    fn leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.blossom_leaves(b, &mut out);
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let mut ls = self.leaves(b);
            self.queue.append(&mut ls);
        } else {
            let base = self.blossombase[b];
            let mb = self.mate[base];
            debug_assert!(mb != NONE);
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    /// Trace back from both endpoints of a tight S-S edge; returns the
    /// lowest common ancestor blossom's base, or NONE when the trees have
    /// different roots (then the edge augments the matching).
    fn scan_blossom(&mut self, v: usize, w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        let mut v = v;
        let mut w = w;
        while v != NONE || w != NONE {
            if v != NONE {
                let b = self.inblossom[v];
                if self.label[b] & 4 != 0 {
                    base = self.blossombase[b];
                    break;
                }
                debug_assert_eq!(self.label[b], 1);
                path.push(b);
                self.label[b] = 5;
                debug_assert_eq!(self.labelend[b], self.mate[self.blossombase[b]]);
                if self.labelend[b] == NONE {
                    v = NONE;
                } else {
                    let t = self.endpoint[self.labelend[b]];
                    let bt = self.inblossom[t];
                    debug_assert_eq!(self.label[bt], 2);
                    debug_assert!(self.labelend[bt] != NONE);
                    v = self.endpoint[self.labelend[bt]];
                }
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn childs_at(&self, b: usize, j: isize) -> usize {
        let len = self.blossomchilds[b].len() as isize;
        self.blossomchilds[b][((j % len + len) % len) as usize]
    }

    fn endps_at(&self, b: usize, j: isize) -> usize {
        let len = self.blossomendps[b].len() as isize;
        self.blossomendps[b][((j % len + len) % len) as usize]
    }

    /// Form a new blossom with the given base, closed by tight edge k.
    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom pool exhausted");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;

        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            debug_assert!(
                self.label[bv] == 2
                    || (self.label[bv] == 1
                        && self.labelend[bv] == self.mate[self.blossombase[bv]])
            );
            debug_assert!(self.labelend[bv] != NONE);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            debug_assert!(
                self.label[bw] == 2
                    || (self.label[bw] == 1
                        && self.labelend[bw] == self.mate[self.blossombase[bw]])
            );
            debug_assert!(self.labelend[bw] != NONE);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }

        debug_assert_eq!(self.label[bb], 1);
        self.blossomchilds[b] = path;
        self.blossomendps[b] = endps;
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = Rat::zero();
        for leaf in self.leaves(b) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }

        // best-edge lists for delta-3 bookkeeping
        let mut bestedgeto = vec![NONE; 2 * self.nvertex];
        for bv in self.blossomchilds[b].clone() {
            let nblists: Vec<Vec<usize>> = if self.blossombestedges[bv].is_empty() {
                self.leaves(bv)
                    .into_iter()
                    .map(|leaf| self.neighbend[leaf].iter().map(|p| p / 2).collect())
                    .collect()
            } else {
                vec![std::mem::take(&mut self.blossombestedges[bv])]
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.blossombestedges[bv] = Vec::new();
            self.bestedge[bv] = NONE;
        }
        self.blossombestedges[b] = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &k in &self.blossombestedges[b] {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
    }

    /// Expand and discard blossom b; with `endstage` the sub-blossoms stay
    /// unlabeled, otherwise the alternating path through b is relabeled.
    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        for s in self.blossomchilds[b].clone() {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s].is_zero() {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            debug_assert!(self.labelend[b] != NONE);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = self.blossomchilds[b]
                .iter()
                .position(|&c| c == entrychild)
                .expect("entry child in blossom") as isize;
            let len = self.blossomchilds[b].len() as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 != 0 {
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = self.labelend[b];
            while j != 0 {
                // relabel the two vertices resp. sub-blossoms stepped over
                self.label[self.endpoint[p ^ 1]] = 0;
                let ep = self.endps_at(b, j - endptrick as isize) ^ endptrick;
                self.label[self.endpoint[ep ^ 1]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                self.allowedge[ep / 2] = true;
                j += jstep;
                p = self.endps_at(b, j - endptrick as isize) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = self.childs_at(b, 0);
            let epv = self.endpoint[p ^ 1];
            self.label[epv] = 2;
            self.label[bv] = 2;
            self.labelend[epv] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while self.childs_at(b, j) != entrychild {
                let bv = self.childs_at(b, j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let mut labeled = NONE;
                for leaf in self.leaves(bv) {
                    if self.label[leaf] != 0 {
                        labeled = leaf;
                        break;
                    }
                }
                if labeled != NONE {
                    debug_assert_eq!(self.label[labeled], 2);
                    debug_assert_eq!(self.inblossom[labeled], bv);
                    self.label[labeled] = 0;
                    let base_mate = self.mate[self.blossombase[bv]];
                    self.label[self.endpoint[base_mate]] = 0;
                    let le = self.labelend[labeled];
                    self.assign_label(labeled, 2, le);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossomchilds[b] = Vec::new();
        self.blossomendps[b] = Vec::new();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = Vec::new();
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    /// Swap matched and unmatched edges along the path from vertex v to the
    /// base of blossom b, then rotate so v becomes the base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let i = self.blossomchilds[b].iter().position(|&c| c == t).expect("child") as isize;
        let len = self.blossomchilds[b].len() as isize;
        let (mut j, jstep, endptrick): (isize, isize, usize) =
            if i & 1 != 0 { (i - len, 1, 0) } else { (i, -1, 1) };
        while j != 0 {
            j += jstep;
            let t = self.childs_at(b, j);
            let p = self.endps_at(b, j - endptrick as isize) ^ endptrick;
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.childs_at(b, j);
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i as usize);
        self.blossomendps[b].rotate_left(i as usize);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    /// Augment along the alternating trees through tight edge k.
    fn augment_matching(&mut self, k: usize) {
        let (v, w) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.label[bs], 1);
                debug_assert_eq!(self.labelend[bs], self.mate[self.blossombase[bs]]);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert_eq!(self.label[bt], 2);
                debug_assert!(self.labelend[bt] != NONE);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert_eq!(self.blossombase[bt], t);
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn run(&mut self) {
        for _stage in 0..self.nvertex {
            self.label.iter_mut().for_each(|l| *l = 0);
            self.bestedge.iter_mut().for_each(|e| *e = NONE);
            for be in self.blossombestedges[self.nvertex..].iter_mut() {
                *be = Vec::new();
            }
            self.allowedge.iter_mut().for_each(|a| *a = false);
            self.queue.clear();
            for v in 0..self.nvertex {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }

            let mut augmented = false;
            loop {
                while let Some(v) = self.queue.pop() {
                    debug_assert_eq!(self.label[self.inblossom[v]], 1);
                    for p in self.neighbend[v].clone() {
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = None;
                        if !self.allowedge[k] {
                            let s = self.slack(k);
                            if s <= Rat::zero() {
                                self.allowedge[k] = true;
                            } else {
                                kslack = Some(s);
                            }
                        }
                        if self.allowedge[k] {
                            let bw = self.inblossom[w];
                            if self.label[bw] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[bw] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                debug_assert_eq!(self.label[bw], 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE
                                || kslack.as_ref().expect("slack") < &self.slack(self.bestedge[b])
                            {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE
                                || kslack.as_ref().expect("slack") < &self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                    if augmented {
                        break;
                    }
                }
                if augmented {
                    break;
                }

                // dual adjustment
                let mut deltatype = 1u8;
                let mut delta: Option<Rat> = self.dualvar[..self.nvertex].iter().min().cloned();
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                for v in 0..self.nvertex {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if delta.as_ref().is_none_or(|cur| d < *cur) {
                            delta = Some(d);
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * self.nvertex {
                    if self.blossomparent[b] == NONE
                        && self.label[b] == 1
                        && self.bestedge[b] != NONE
                    {
                        let d = self.slack(self.bestedge[b]) / Rat::from_integer(2.into());
                        if delta.as_ref().is_none_or(|cur| d < *cur) {
                            delta = Some(d);
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && delta.as_ref().is_none_or(|cur| self.dualvar[b] < *cur)
                    {
                        delta = Some(self.dualvar[b].clone());
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                let delta = delta.expect("nonempty vertex set");

                for v in 0..self.nvertex {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= &delta,
                        2 => self.dualvar[v] += &delta,
                        _ => {}
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += &delta,
                            2 => self.dualvar[b] -= &delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, j) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _) = self.edges[deltaedge];
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }

            if !augmented {
                break;
            }
            for b in self.nvertex..2 * self.nvertex {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b].is_zero()
                {
                    self.expand_blossom(b, true);
                }
            }
        }
    }

    /// Complementary-slackness check of the final primal/dual pair; exact
    /// because every quantity is rational.
    #[cfg(debug_assertions)]
    fn verify_optimum(&self) {
        for v in 0..self.nvertex {
            assert!(!self.dualvar[v].is_negative(), "negative vertex dual");
            if self.mate[v] == NONE {
                assert!(self.dualvar[v].is_zero(), "free vertex with positive dual");
            }
        }
        for b in self.nvertex..2 * self.nvertex {
            if self.blossombase[b] != NONE {
                assert!(!self.dualvar[b].is_negative(), "negative blossom dual");
            }
        }
        for k in 0..self.edges.len() {
            let (i, j) = self.edges[k];
            let mut s = self.slack(k);
            let mut iblossoms = vec![i];
            let mut jblossoms = vec![j];
            while self.blossomparent[*iblossoms.last().unwrap()] != NONE {
                iblossoms.push(self.blossomparent[*iblossoms.last().unwrap()]);
            }
            while self.blossomparent[*jblossoms.last().unwrap()] != NONE {
                jblossoms.push(self.blossomparent[*jblossoms.last().unwrap()]);
            }
            for (bi, bj) in iblossoms.iter().rev().zip(jblossoms.iter().rev()) {
                if bi != bj {
                    break;
                }
                s += &self.dualvar[*bi] + &self.dualvar[*bi];
            }
            assert!(!s.is_negative(), "edge with negative slack");
            if self.mate[i] / 2 == k || self.mate[j] / 2 == k {
                assert!(self.mate[i] / 2 == k && self.mate[j] / 2 == k);
                assert!(s.is_zero(), "matched edge with positive slack");
            }
        }
    }
}
