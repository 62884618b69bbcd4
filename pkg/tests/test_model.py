import numpy as np
import pytest

from moranweights.kernel import get_backend
from moranweights.model import (
    ModelConfig,
    Pedigree,
    ReproductionEvent,
    Variant,
    generate_pedigree,
    sample_event,
)
from moranweights.randomness import RawStream, bit_generator


def test_variant_codes():
    assert ModelConfig(10, variant=Variant.DISTINCT).variant_code == 0
    assert ModelConfig(10, variant=Variant.INDEPENDENT).variant_code == 1


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(population_size=2)  # distinct needs N >= m + 1
    with pytest.raises(ValueError):
        ModelConfig(population_size=10, parent_count=1)
    with pytest.raises(ValueError):
        ModelConfig(population_size=10, seed=-1)
    with pytest.raises(ValueError):
        ModelConfig(population_size=10, seed=2**64)
    # independent variant allows tiny populations
    ModelConfig(population_size=1, variant=Variant.INDEPENDENT)
    ModelConfig(population_size=3, parent_count=2)


def test_sample_event_ranges_and_distinctness():
    config = ModelConfig(population_size=6, parent_count=3, seed=4)
    stream = RawStream(bit_generator(config.seed))
    for t in range(500):
        event = sample_event(config, t, stream)
        assert event.time == t
        members = (event.child, *event.parents)
        assert all(1 <= i <= 6 for i in members)
        assert len(set(members)) == 4  # distinct variant: all slots differ


def test_independent_variant_allows_repeats():
    config = ModelConfig(
        population_size=3, parent_count=2, variant=Variant.INDEPENDENT, seed=1
    )
    stream = RawStream(bit_generator(config.seed))
    events = [sample_event(config, t, stream) for t in range(2000)]
    assert any(e.child in e.parents for e in events)
    assert any(e.parents[0] == e.parents[1] for e in events)


def test_ordered_tuple_distribution_exact():
    # N=4, m=2 distinct: 4*3*2 = 24 ordered (parent1, parent2, child) tuples,
    # each with probability 1/24
    config = ModelConfig(population_size=4, seed=0)
    impl = get_backend()
    events = impl.sample_events(
        np.random.PCG64(0), 4, 2, config.variant_code, 1_000_000
    )
    tuples, counts = np.unique(events, axis=0, return_counts=True)
    assert len(tuples) == 24
    expected = 1_000_000 / 24
    # 4 sigma band per cell under binomial sampling
    sigma = (1_000_000 * (1 / 24) * (23 / 24)) ** 0.5
    assert np.abs(counts - expected).max() < 4 * sigma


def test_child_uniformity_chi_square():
    impl = get_backend()
    events = impl.sample_events(np.random.PCG64(3), 10, 2, 0, 100_000)
    counts = np.bincount(events[:, 0], minlength=10)
    expected = 100_000 / 10
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # 9 dof, 0.999 quantile ~ 27.88
    assert chi2 < 27.88


def test_event_validation():
    with pytest.raises(ValueError):
        ReproductionEvent(time=-1, child=1, parents=(2, 3))
    with pytest.raises(ValueError):
        ReproductionEvent(time=0, child=0, parents=(2, 3))


def test_pedigree_roundtrip(tmp_path):
    config = ModelConfig(population_size=8, parent_count=3, seed=21)
    pedigree = generate_pedigree(config, 40)
    assert len(pedigree.events) == 40
    path = tmp_path / "pedigree.csv"
    pedigree.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "t,child,parent1,parent2,parent3"
    back = Pedigree.from_csv(path, config)
    assert back.events == pedigree.events


def test_pedigree_is_seed_reproducible():
    config = ModelConfig(population_size=5, seed=77)
    a = generate_pedigree(config, 25)
    b = generate_pedigree(config, 25)
    assert a.events == b.events
