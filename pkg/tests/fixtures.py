"""Hand-built datasets shared by several test modules."""
import numpy as np

from clusterrules.dataset import Dataset


def metric_fixture_373() -> Dataset:
    """3 clusters, 373 rows in cluster 0 (370 with flag=yes), 20 other rows with flag=yes.

    The explanation ``a == yes AND b == yes AND c == yes`` holds exactly on
    the flagged rows.
    """
    n0, n_other = 373, 17 + 100
    labels = [0] * n0 + [1] * 60 + [2] * (n_other - 60)
    flag = ["yes"] * 370 + ["no"] * 3 + ["yes"] * 20 + ["no"] * (n_other - 20)
    cols = {a: list(flag) for a in ("a", "b", "c")}
    return Dataset.from_columns(cols, labels)


def census_like(seed=0) -> Dataset:
    """Census-flavoured 3-cluster fixture.

    Cluster 0 is young with mid education, cluster 1 young with low
    education, cluster 2 older with mid-to-high education. Neither age nor
    education alone isolates cluster 0; their conjunction does. Inside the
    shared ranges the cluster mix is the same at every value, so a
    supervised tree has no reason to split there. Relationship is drawn
    from the same distribution in every cluster.
    """
    r = np.random.default_rng(seed)
    young = np.arange(17, 36)
    ages = np.concatenate([np.repeat(young, 20), np.repeat(young, 15), np.tile(np.arange(36, 71), 9)[:300]])
    edus = np.concatenate([
        np.tile(np.arange(9, 14), 76),
        np.tile(np.arange(1, 9), 36)[:285],
        np.concatenate([np.repeat(np.arange(9, 14), 30), np.repeat(np.arange(14, 17), 50)]),
    ])
    labels = [0] * 380 + [1] * 285 + [2] * 300
    r.shuffle(edus[:380])
    rels = r.choice(["Husband", "Wife", "Unmarried", "Own-child"], len(labels)).tolist()
    return Dataset.from_columns(
        {"age": ages.tolist(), "education-num": edus.tolist(), "relationship": rels}, labels,
        kinds={"age": "numeric", "education-num": "numeric"})


def character_fixture():
    """Three transactions [A,1], [b,2], [A,2] under a small character taxonomy."""
    from clusterrules.gfim import CategoryTaxonomy
    from clusterrules.items import Category as C
    from clusterrules.transactions import Transaction

    tax = CategoryTaxonomy({
        C("Character"): [C("Number"), C("Letter")],
        C("Letter"): [C("Capital"), C("Lowercase")],
        C("Capital"): [C("A")],
        C("Lowercase"): [C("b")],
        C("Number"): [C("1"), C("2")],
    })
    rows = [("A", "1"), ("b", "2"), ("A", "2")]
    ts = [Transaction(i, frozenset(map(C, r)), 0) for i, r in enumerate(rows)]
    return ts, tax


def random_instance(seed: int):
    """Small mixed-type dataset with its interval taxonomy and mining parameters.

    Returns (dataset, taxonomy, intervals_by_attribute, minsup, maxsize).
    """
    from clusterrules.binning import BinningConfig, bin_attribute
    from clusterrules.taxonomy import build_taxonomy

    r = np.random.default_rng(seed)
    n = int(r.integers(5, 201))
    n_attr = int(r.integers(2, 7))
    cols, kinds = {}, {}
    for a in range(n_attr):
        name = f"a{a}"
        if r.random() < 0.5:
            v = r.integers(0, int(r.integers(2, 7)), n).astype(float)
            v[r.random(n) < 0.05] = np.nan
            cols[name] = [None if np.isnan(x) else float(x) for x in v]
            kinds[name] = "numeric"
        else:
            cats = [f"c{k}" for k in range(int(r.integers(2, 4)))]
            cols[name] = [None if r.random() < 0.05 else str(r.choice(cats)) for _ in range(n)]
            kinds[name] = "categorical"
    labels = r.integers(0, 2, n).tolist()
    d = Dataset.from_columns(cols, labels, kinds=kinds)
    cfg = BinningConfig(bins_per_method=int(r.integers(2, 5)))
    intervals = {a: bin_attribute(d.column(a).values, d.label_codes, cfg)
                 for a in d.attributes if kinds[a] == "numeric"}
    minsup = float(r.choice([0.5, 0.7, 0.9]))
    maxsize = int(r.choice([1, 2, 3], p=[0.15, 0.35, 0.5]))
    return d, build_taxonomy(intervals), intervals, minsup, maxsize
