//! Immediate dominators over a CFG and the dominator-tree block partition
//! used for AST splitting.

use thiserror::Error;

use crate::cfg::Cfg;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominatorTree {
    /// Immediate dominator per CFG index; the entry maps to itself.
    pub idom: Vec<usize>,
}

impl DominatorTree {
    /// Whether `a` dominates `b` (reflexively).
    pub fn dominates(&self, a: usize, b: usize) -> bool {
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            let up = self.idom[cur];
            if up == cur {
                return false;
            }
            cur = up;
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomError {
    #[error("CFG node {0} is not reachable from the entry")]
    Unreachable(usize),
    #[error("CFG is empty")]
    Empty,
}

/// Iterative data-flow dominator computation over reverse postorder.
pub fn build_dominator_tree(cfg: &Cfg) -> Result<DominatorTree, DomError> {
    let n = cfg.len();
    if n == 0 {
        return Err(DomError::Empty);
    }
    let entry = cfg.entry();

    // Postorder DFS from the entry.
    let mut post = Vec::with_capacity(n);
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    let mut stack = vec![(entry, 0usize)];
    state[entry] = 1;
    while let Some(&(u, cursor)) = stack.last() {
        if cursor < cfg.succs[u].len() {
            stack.last_mut().expect("nonempty").1 += 1;
            let v = cfg.succs[u][cursor];
            if state[v] == 0 {
                state[v] = 1;
                stack.push((v, 0));
            }
        } else {
            post.push(u);
            state[u] = 2;
            stack.pop();
        }
    }
    if let Some(unreached) = state.iter().position(|&s| s != 2) {
        return Err(DomError::Unreachable(unreached));
    }

    let mut rpo_number = vec![0usize; n];
    for (i, &v) in post.iter().rev().enumerate() {
        rpo_number[v] = i;
    }
    let rpo: Vec<usize> = post.iter().rev().copied().collect();
    let preds = cfg.preds();

    const UNDEF: usize = usize::MAX;
    let mut idom = vec![UNDEF; n];
    idom[entry] = entry;

    let intersect = |idom: &[usize], mut a: usize, mut b: usize| {
        while a != b {
            while rpo_number[a] > rpo_number[b] {
                a = idom[a];
            }
            while rpo_number[b] > rpo_number[a] {
                b = idom[b];
            }
        }
        a
    };

    let mut changed = true;
    while changed {
        changed = false;
        for &v in rpo.iter().skip(1) {
            let mut new_idom = UNDEF;
            for &p in &preds[v] {
                if idom[p] == UNDEF {
                    continue;
                }
                new_idom = if new_idom == UNDEF {
                    p
                } else {
                    intersect(&idom, p, new_idom)
                };
            }
            debug_assert_ne!(new_idom, UNDEF, "reachable node has a processed pred");
            if idom[v] != new_idom {
                idom[v] = new_idom;
                changed = true;
            }
        }
    }
    Ok(DominatorTree { idom })
}

/// Splits the dominator tree into blocks: a dominator edge `u -> v` is cut
/// when `v` has more than one incoming CFG edge or `u` has more than one
/// outgoing CFG edge; each remaining connected component, in original
/// statement order, is one block of CFG indices.
pub fn partition_blocks(dom: &DominatorTree, cfg: &Cfg) -> Vec<Vec<usize>> {
    let n = cfg.len();
    let mut in_deg = vec![0usize; n];
    for succs in &cfg.succs {
        for &v in succs {
            in_deg[v] += 1;
        }
    }

    // Union kept dominator edges.
    let mut rep: Vec<usize> = (0..n).collect();
    fn find(rep: &mut Vec<usize>, x: usize) -> usize {
        if rep[x] != x {
            let r = find(rep, rep[x]);
            rep[x] = r;
        }
        rep[x]
    }
    for v in 0..n {
        let u = dom.idom[v];
        if u == v {
            continue;
        }
        if in_deg[v] > 1 || cfg.out_degree(u) > 1 {
            continue;
        }
        let (ru, rv) = (find(&mut rep, u), find(&mut rep, v));
        if ru != rv {
            rep[rv] = ru;
        }
    }

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_of: Vec<Option<usize>> = vec![None; n];
    // CFG indices are allocated in statement order, so walking them in
    // order yields both block ordering and in-block ordering by original
    // statement position.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| cfg.stmts[i]);
    for i in order {
        let r = find(&mut rep, i);
        match block_of[r] {
            Some(b) => blocks[b].push(i),
            None => {
                block_of[r] = Some(blocks.len());
                blocks.push(vec![i]);
            }
        }
    }
    blocks
}
