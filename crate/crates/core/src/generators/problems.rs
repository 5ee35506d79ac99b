//! Random instance drawing for each domain. Solvability is checked by the
//! caller; these functions only build well-formed problems.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::GeneratorParams;
use crate::pddl::{GroundAtom, Problem, TypedName};

fn atom(pred: &str, args: &[&str]) -> GroundAtom {
    GroundAtom::new(pred, args)
}

fn names(prefix: &str, n: u32) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn typed<'a>(names: &'a [String], ty: Option<&str>) -> impl Iterator<Item = TypedName> + 'a {
    let ty = ty.map(str::to_owned);
    names.iter().map(move |n| TypedName {
        name: n.clone(),
        ty: ty.clone(),
    })
}

pub(super) fn draw(params: &GeneratorParams, name: String, rng: &mut ChaCha8Rng) -> Problem {
    match *params {
        GeneratorParams::Ferry { cars, locations } => ferry(cars, locations, name, rng),
        GeneratorParams::Blocksworld { blocks } => blocksworld(blocks, name, rng),
        GeneratorParams::Miconic { floors, passengers } => miconic(floors, passengers, name, rng),
        GeneratorParams::Hanoi {
            disks,
            pegs,
            scrambled,
        } => hanoi(disks, pegs, scrambled, name, rng),
        GeneratorParams::Grippers {
            balls,
            robots,
            rooms,
        } => grippers(balls, robots, rooms, name, rng),
        GeneratorParams::Driverlog {
            locations,
            drivers,
            trucks,
            packages,
        } => driverlog(locations, drivers, trucks, packages, name, rng),
    }
}

fn ferry(n: u32, m: u32, name: String, rng: &mut ChaCha8Rng) -> Problem {
    let cars = names("car-", n);
    let locs = names("location-", m);
    let mut init = Vec::new();
    init.extend(locs.iter().map(|l| atom("location", &[l])));
    init.extend(cars.iter().map(|c| atom("car", &[c])));
    for c in &cars {
        init.push(atom("at", &[c, locs.choose(rng).unwrap()]));
    }
    init.push(atom("at-ferry", &[locs.choose(rng).unwrap()]));
    init.push(atom("empty-ferry", &[]));
    for i in 0..locs.len() {
        for j in i + 1..locs.len() {
            init.push(atom("not-eq", &[&locs[i], &locs[j]]));
            init.push(atom("not-eq", &[&locs[j], &locs[i]]));
        }
    }
    let goal = cars
        .iter()
        .map(|c| atom("at", &[c, locs.choose(rng).unwrap()]))
        .collect();
    Problem {
        name,
        domain_name: "ferry".into(),
        objects: typed(&locs, None).chain(typed(&cars, None)).collect(),
        init,
        goal,
    }
}

/// Random stacking of `n` blocks: `below[i]` is the block under `i`.
fn random_towers(n: usize, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut below = vec![None; n];
    let mut tops: Vec<usize> = Vec::new();
    for b in order {
        let k = rng.gen_range(0..=tops.len());
        if k < tops.len() {
            below[b] = Some(tops[k]);
            tops[k] = b;
        } else {
            tops.push(b);
        }
    }
    below
}

fn blocksworld(n: u32, name: String, rng: &mut ChaCha8Rng) -> Problem {
    let blocks = names("b", n);
    let state_atoms = |below: &[Option<usize>], with_hand: bool| {
        let mut out = Vec::new();
        if with_hand {
            out.push(atom("handempty", &[]));
        }
        let covered: Vec<bool> = (0..below.len()).map(|b| below.contains(&Some(b))).collect();
        for (b, under) in below.iter().enumerate() {
            match under {
                Some(u) => out.push(atom("on", &[&blocks[b], &blocks[*u]])),
                None => out.push(atom("ontable", &[&blocks[b]])),
            }
            if !covered[b] {
                out.push(atom("clear", &[&blocks[b]]));
            }
        }
        out
    };
    let init_cfg = random_towers(n as usize, rng);
    let goal_cfg = random_towers(n as usize, rng);
    Problem {
        name,
        domain_name: "blocksworld".into(),
        objects: typed(&blocks, None).collect(),
        init: state_atoms(&init_cfg, true),
        goal: state_atoms(&goal_cfg, false),
    }
}

fn miconic(floors: u32, passengers: u32, name: String, rng: &mut ChaCha8Rng) -> Problem {
    let ps = names("p", passengers);
    let fs = names("f", floors);
    let mut init = vec![atom("lift-at", &[fs.choose(rng).unwrap()])];
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            init.push(atom("above", &[&fs[i], &fs[j]]));
        }
    }
    for p in &ps {
        let picks: Vec<&String> = fs.choose_multiple(rng, 2).collect();
        init.push(atom("origin", &[p, picks[0]]));
        init.push(atom("destin", &[p, picks[1]]));
    }
    init.extend(ps.iter().map(|p| atom("not-boarded", &[p])));
    init.extend(ps.iter().map(|p| atom("not-served", &[p])));
    Problem {
        name,
        domain_name: "miconic".into(),
        objects: typed(&ps, Some("passenger"))
            .chain(typed(&fs, Some("floor")))
            .collect(),
        init,
        goal: ps.iter().map(|p| atom("served", &[p])).collect(),
    }
}

/// Pegs as stacks of disk indices, bottom first; index 0 is the smallest disk.
fn hanoi_config_atoms(
    discs: &[String],
    pegs: &[String],
    stacks: &[Vec<usize>],
    clear: bool,
) -> Vec<GroundAtom> {
    let mut on = vec![String::new(); discs.len()];
    let mut out = Vec::new();
    for (p, stack) in stacks.iter().enumerate() {
        let mut under = &pegs[p];
        for &d in stack {
            on[d] = under.clone();
            under = &discs[d];
        }
    }
    for (d, u) in on.iter().enumerate() {
        out.push(atom("on", &[&discs[d], u]));
    }
    if clear {
        for (p, stack) in stacks.iter().enumerate() {
            match stack.last() {
                Some(&d) => out.push(atom("clear", &[&discs[d]])),
                None => out.push(atom("clear", &[&pegs[p]])),
            }
        }
    }
    out
}

fn random_hanoi_config(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut stacks = vec![Vec::new(); k];
    for d in (0..n).rev() {
        stacks[rng.gen_range(0..k)].push(d);
    }
    stacks
}

fn hanoi(n: u32, k: u32, scrambled: bool, name: String, rng: &mut ChaCha8Rng) -> Problem {
    let discs = names("d", n);
    let pegs = names("p", k);
    let mut init = Vec::new();
    for p in &pegs {
        for d in &discs {
            init.push(atom("smaller", &[p, d]));
        }
    }
    for i in 0..discs.len() {
        for j in i + 1..discs.len() {
            init.push(atom("smaller", &[&discs[j], &discs[i]]));
        }
    }
    let (start, end) = if scrambled {
        let a = random_hanoi_config(n as usize, k as usize, rng);
        let b = random_hanoi_config(n as usize, k as usize, rng);
        (a, b)
    } else {
        let picks: Vec<usize> = (0..k as usize)
            .collect::<Vec<_>>()
            .choose_multiple(rng, 2)
            .copied()
            .collect();
        let tower: Vec<usize> = (0..n as usize).rev().collect();
        let mut a = vec![Vec::new(); k as usize];
        let mut b = vec![Vec::new(); k as usize];
        a[picks[0]] = tower.clone();
        b[picks[1]] = tower;
        (a, b)
    };
    init.extend(hanoi_config_atoms(&discs, &pegs, &start, true));
    Problem {
        name,
        domain_name: "hanoi".into(),
        objects: typed(&discs, None).chain(typed(&pegs, None)).collect(),
        init,
        goal: hanoi_config_atoms(&discs, &pegs, &end, false),
    }
}

fn grippers(balls: u32, robots: u32, rooms: u32, name: String, rng: &mut ChaCha8Rng) -> Problem {
    let rs = names("robot", robots);
    let ls = names("lgripper", robots);
    let gs = names("rgripper", robots);
    let rooms = names("room", rooms);
    let bs = names("ball", balls);
    let mut init = Vec::new();
    for i in 0..rs.len() {
        init.push(atom("at-robby", &[&rs[i], rooms.choose(rng).unwrap()]));
        init.push(atom("free", &[&rs[i], &ls[i]]));
        init.push(atom("free", &[&rs[i], &gs[i]]));
    }
    for b in &bs {
        init.push(atom("at", &[b, rooms.choose(rng).unwrap()]));
    }
    let goal = bs
        .iter()
        .map(|b| atom("at", &[b, rooms.choose(rng).unwrap()]))
        .collect();
    let grippers: Vec<String> = ls
        .iter()
        .zip(&gs)
        .flat_map(|(l, r)| [l.clone(), r.clone()])
        .collect();
    Problem {
        name,
        domain_name: "grippers".into(),
        objects: typed(&rs, Some("robot"))
            .chain(typed(&grippers, Some("gripper")))
            .chain(typed(&rooms, Some("room")))
            .chain(typed(&bs, Some("object")))
            .collect(),
        init,
        goal,
    }
}

/// Probability of each non-tree edge in the driverlog road graph.
const EXTRA_LINK_P: f64 = 0.25;

#[allow(clippy::needless_range_loop)]
fn driverlog(l: u32, d: u32, t: u32, p: u32, name: String, rng: &mut ChaCha8Rng) -> Problem {
    let locs = names("loc-", l);
    let drivers = names("driver-", d);
    let trucks = names("truck-", t);
    let objs = names("obj-", p);
    let n = locs.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 1..n {
        let j = rng.gen_range(0..i);
        adj[i][j] = true;
        adj[j][i] = true;
    }
    for i in 0..n {
        for j in i + 1..n {
            if !adj[i][j] && rng.gen_bool(EXTRA_LINK_P) {
                adj[i][j] = true;
                adj[j][i] = true;
            }
        }
    }
    let mut init = Vec::new();
    for tr in &trucks {
        init.push(atom("at", &[tr, locs.choose(rng).unwrap()]));
    }
    for o in &objs {
        init.push(atom("at", &[o, locs.choose(rng).unwrap()]));
    }
    for dr in &drivers {
        init.push(atom("at", &[dr, locs.choose(rng).unwrap()]));
    }
    for pred in ["link", "path"] {
        for i in 0..n {
            for j in 0..n {
                if adj[i][j] {
                    init.push(atom(pred, &[&locs[i], &locs[j]]));
                }
            }
        }
    }
    init.extend(trucks.iter().map(|tr| atom("empty", &[tr])));
    let goal = objs
        .iter()
        .map(|o| atom("at", &[o, locs.choose(rng).unwrap()]))
        .collect();
    Problem {
        name,
        domain_name: "driverlog".into(),
        objects: typed(&drivers, Some("driver"))
            .chain(typed(&trucks, Some("truck")))
            .chain(typed(&objs, Some("obj")))
            .chain(typed(&locs, Some("location")))
            .collect(),
        init,
        goal,
    }
}
