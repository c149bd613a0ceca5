use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Open01};

use super::{
    admit, encode_auction, encode_dmds, encode_etf, encode_knapsack, encode_mis, ConstrainedProblem,
    EtfSpec, ProblemKind,
};
use crate::error::{Error, Result};

/// Consecutive rejections tolerated before a generator gives up.
pub const MAX_RETRIES: u64 = 1000;

/// Edge-creation probability of the benchmark graph ensembles.
pub const ER_EDGE_PROBABILITY: f64 = 0.3;

/// Items in a sampled auction.
pub const AUCTION_ITEMS: usize = 3;

/// A deterministic generator for substream `stream` of `seed`.
pub fn substream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    /// Ordered pairs; for directed graphs `(u, v)` is the arc `u → v`.
    pub edges: Vec<(usize, usize)>,
    pub directed: bool,
}

/// Erdős–Rényi `G(n, p)`. Directed graphs orient each sampled edge uniformly.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64, directed: bool) -> Result<Graph> {
    gen_erdos_renyi_with(n, p, &mut substream_rng(seed, 0), directed)
}

fn gen_erdos_renyi_with(n: usize, p: f64, rng: &mut ChaCha8Rng, directed: bool) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::config(format!("edge probability {p} outside [0, 1]")));
    }
    let mut edges = Vec::new();
    for v in 0..n {
        for w in v + 1..n {
            if rng.random_bool(p) {
                if directed && rng.random_bool(0.5) {
                    edges.push((w, v));
                } else {
                    edges.push((v, w));
                }
            }
        }
    }
    Ok(Graph { n, edges, directed })
}

/// Uniform knapsack sampler (not the benchmark generator of record): values
/// and weights uniform in `[1, 2n]`, capacity `2n`.
pub fn gen_knapsack(n: usize, rng: &mut impl Rng) -> (Vec<i64>, Vec<i64>, i64) {
    let hi = 2 * n as i64;
    let values = (0..n).map(|_| rng.random_range(1..=hi)).collect();
    let weights = (0..n).map(|_| rng.random_range(1..=hi)).collect();
    (values, weights, hi)
}

/// Uniform auction sampler (not the benchmark generator of record): unit
/// multiplicities, each bid asks for a random nonempty subset of the items
/// and pays a uniform integer in `[1, 2n]`.
pub fn gen_auction(n: usize, items: usize, rng: &mut impl Rng) -> (Vec<f64>, Vec<Vec<i64>>, Vec<i64>) {
    let hi = 2 * n as i64;
    let payments = (0..n).map(|_| rng.random_range(1..=hi) as f64).collect();
    let quantities = (0..n)
        .map(|_| {
            let subset = rng.random_range(1..1u64 << items);
            (0..items).map(|i| ((subset >> i) & 1) as i64).collect()
        })
        .collect();
    (payments, quantities, vec![1; items])
}

fn sample_etf(n: usize, rng: &mut impl Rng) -> EtfSpec {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample(Open01)).collect();
    let total: f64 = raw.iter().sum();
    let price = Normal::new(1.0, 0.1).expect("valid normal parameters");
    let prices = (0..n).map(|_| rng.sample::<f64, _>(price).max(f64::MIN_POSITIVE)).collect();
    let sectors = (0..n).map(|_| *[0, 1, 2].choose(rng).unwrap()).collect();
    EtfSpec {
        weights: raw.iter().map(|w| w / total).collect(),
        prices,
        sectors,
        shares: etf_shares(n),
        epsilon: 0.1,
        enforced_sector: 0,
        scale: 10.0,
    }
}

/// `m = ⌈n/2 + 1⌉`.
pub fn etf_shares(n: usize) -> u32 {
    (n.div_ceil(2) + 1) as u32
}

/// An admitted instance together with the substream that produced it.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub problem: ConstrainedProblem,
    pub seed: u64,
    /// Rejected draws before this one; also the substream index used.
    pub retries: u64,
}

/// Samples an ETF instance, retrying rejected draws on fresh substreams.
pub fn gen_etf_instance(n: usize, seed: u64) -> Result<GeneratedInstance> {
    if n < 2 {
        return Err(Error::config("ETF instances need at least 2 assets"));
    }
    generate_instance(ProblemKind::Etf, n, seed)
}

/// Draws an admitted instance of `kind` with `n` decision variables.
///
/// Draw `k` uses substream `k` of `seed`; draws failing [`admit`] are
/// discarded, up to [`MAX_RETRIES`] in a row.
pub fn generate_instance(kind: ProblemKind, n: usize, seed: u64) -> Result<GeneratedInstance> {
    if n == 0 {
        return Err(Error::config("instance size must be positive"));
    }
    for retries in 0..MAX_RETRIES {
        let rng = &mut substream_rng(seed, retries);
        let drawn = match kind {
            ProblemKind::Mis | ProblemKind::Dmds => {
                let directed = kind == ProblemKind::Dmds;
                let g = gen_erdos_renyi_with(n, ER_EDGE_PROBABILITY, rng, directed)?;
                if directed {
                    encode_dmds(n, &g.edges)
                } else {
                    encode_mis(n, &g.edges)
                }
            }
            ProblemKind::Knapsack => {
                let (values, weights, capacity) = gen_knapsack(n, rng);
                encode_knapsack(&values, &weights, capacity)
            }
            ProblemKind::Auction => {
                let (payments, quantities, multiplicities) = gen_auction(n, AUCTION_ITEMS, rng);
                encode_auction(&payments, &quantities, &multiplicities)
            }
            ProblemKind::Etf => encode_etf(&sample_etf(n, rng)),
        };
        match drawn.and_then(|p| admit(&p).map(|_| p)) {
            Ok(problem) => return Ok(GeneratedInstance { problem, seed, retries }),
            Err(e) if e.is_rejection() => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generator(format!(
        "{MAX_RETRIES} consecutive {kind} draws rejected for n = {n}, seed = {seed}"
    )))
}
