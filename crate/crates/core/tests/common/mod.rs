//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use cbs_complexity::model::{Cell, GridMap, Instance};
use num_bigint::BigUint;
use rand::Rng;

/// Optimal makespan by breadth-first search over joint configurations.
/// Forbids shared cells and swaps; `None` when no joint plan exists.
pub fn joint_bfs_makespan(instance: &Instance) -> Option<usize> {
    let map = instance.map();
    let starts: Vec<Cell> = instance.agents().iter().map(|a| a.0).collect();
    let goals: Vec<Cell> = instance.agents().iter().map(|a| a.1).collect();
    let mut seen: HashMap<Vec<Cell>, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    seen.insert(starts.clone(), 0);
    queue.push_back(starts);
    while let Some(state) = queue.pop_front() {
        let depth = seen[&state];
        if state == goals {
            return Some(depth);
        }
        for next in joint_successors(map, &state) {
            if !seen.contains_key(&next) {
                seen.insert(next.clone(), depth + 1);
                queue.push_back(next);
            }
        }
    }
    None
}

fn joint_successors(map: &GridMap, state: &[Cell]) -> Vec<Vec<Cell>> {
    let options: Vec<Vec<Cell>> = state
        .iter()
        .map(|&c| std::iter::once(c).chain(map.neighbors(c)).collect())
        .collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(state.len());
    extend(&options, state, &mut current, &mut out);
    out
}

fn extend(options: &[Vec<Cell>], prev: &[Cell], current: &mut Vec<Cell>, out: &mut Vec<Vec<Cell>>) {
    let i = current.len();
    if i == options.len() {
        out.push(current.clone());
        return;
    }
    for &c in &options[i] {
        let clash = (0..i).any(|j| current[j] == c || (current[j] == prev[i] && c == prev[j]));
        if !clash {
            current.push(c);
            extend(options, prev, current, out);
            current.pop();
        }
    }
}

/// Direct memoised evaluation of the CT-size recurrence.
pub fn naive_recurrence(r_max: usize, s_max: usize) -> Vec<Vec<BigUint>> {
    let mut t = vec![vec![BigUint::from(0u32); s_max + 1]; r_max + 1];
    for s in 0..=s_max {
        for r in 0..=r_max {
            t[r][s] = if r == 0 || s == 0 {
                BigUint::from(1u32)
            } else if r == 1 {
                BigUint::from(3u32)
            } else {
                &t[r - 1][s] + &t[r - 2][s - 1] + 1u32
            };
        }
    }
    t
}

/// A random `w x h` map with obstacle density `p` and `k` agents with
/// distinct starts and goals; `None` if the draw is unusable.
pub fn random_instance<R: Rng>(rng: &mut R, w: usize, h: usize, k: usize, p: f64) -> Option<Instance> {
    let map = random_map(rng, w, h, p)?;
    let cells: Vec<Cell> = map.cells().collect();
    if cells.len() < k {
        return None;
    }
    let pick = |rng: &mut R| {
        let mut chosen: Vec<Cell> = Vec::with_capacity(k);
        while chosen.len() < k {
            let c = cells[rng.gen_range(0..cells.len())];
            if !chosen.contains(&c) {
                chosen.push(c);
            }
        }
        chosen
    };
    let starts = pick(rng);
    let goals = pick(rng);
    Instance::new(map, starts.into_iter().zip(goals).collect()).ok()
}

/// Unit-weight Dijkstra over the passable cells, scanning all neighbours by coordinates.
pub fn dijkstra(map: &GridMap, from: Cell, to: Cell) -> Option<usize> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let (w, h) = (map.width(), map.height());
    let mut dist = vec![usize::MAX; w * h];
    let mut heap = BinaryHeap::new();
    dist[from.y * w + from.x] = 0;
    heap.push(Reverse((0usize, from.x, from.y)));
    while let Some(Reverse((d, x, y))) = heap.pop() {
        if (x, y) == (to.x, to.y) {
            return Some(d);
        }
        if d > dist[y * w + x] {
            continue;
        }
        let steps: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        for (dx, dy) in steps {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let next = Cell::new(nx as usize, ny as usize);
            if map.is_passable(next) && d + 1 < dist[next.y * w + next.x] {
                dist[next.y * w + next.x] = d + 1;
                heap.push(Reverse((d + 1, next.x, next.y)));
            }
        }
    }
    None
}

/// All-pairs distances by Floyd-Warshall, indexed by row-major cell index.
pub fn floyd_warshall(map: &GridMap) -> Vec<Vec<Option<usize>>> {
    let size = map.width() * map.height();
    let mut d = vec![vec![None; size]; size];
    for a in map.cells() {
        let i = map.index(a);
        d[i][i] = Some(0);
        for b in map.cells() {
            if a.x.abs_diff(b.x) + a.y.abs_diff(b.y) == 1 {
                d[i][map.index(b)] = Some(1);
            }
        }
    }
    for k in 0..size {
        for i in 0..size {
            let Some(ik) = d[i][k] else { continue };
            let row_k = d[k].clone();
            for (ij, kj) in d[i].iter_mut().zip(row_k) {
                if let Some(kj) = kj {
                    if ij.is_none_or(|cur| ik + kj < cur) {
                        *ij = Some(ik + kj);
                    }
                }
            }
        }
    }
    d
}

/// A random passable mask of the given shape with density `p` of blocked cells.
pub fn random_map<R: Rng>(rng: &mut R, w: usize, h: usize, p: f64) -> Option<GridMap> {
    let mask: Vec<bool> = (0..w * h).map(|_| !rng.gen_bool(p)).collect();
    GridMap::from_mask(w, h, mask).ok()
}
