import numpy as np
import pytest

from relaying.channel_model import ChannelGains, Link, MITable, Protocol, gaussian_mi_table


def weak_direct_gains(p_db: float) -> ChannelGains:
    """G_ar = 0 dB, G_br = 5 dB, G_ab = -7 dB."""
    return ChannelGains.from_db(p_db, g_ab_db=-7.0, g_ar_db=0.0, g_br_db=5.0)


@pytest.fixture
def weak_direct_low():
    return weak_direct_gains(0.0)


@pytest.fixture
def weak_direct_high():
    return weak_direct_gains(10.0)


@pytest.fixture
def unit_gains():
    return ChannelGains(g_ab_pow=1.0, g_ar_pow=1.0, g_br_pow=1.0, power=1.0)


@pytest.fixture
def symmetric_mabc(unit_gains):
    return gaussian_mi_table(unit_gains, Protocol.MABC)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_gains(rng: np.random.Generator, ordered: bool = True) -> ChannelGains:
    """Gains between -20 and 10 dB, sorted into G_ab <= G_ar <= G_br when `ordered`."""
    g = rng.uniform(-20.0, 10.0, size=3)
    if ordered:
        g = np.sort(g)
    return ChannelGains.from_db(float(rng.uniform(0.0, 15.0)), *(float(x) for x in g))


def random_table(rng: np.random.Generator, protocol: Protocol) -> MITable:
    """Gaussian-consistent table of a random channel (MAC sum >= each uplink)."""
    return gaussian_mi_table(random_gains(rng, ordered=False), protocol)


def mabc_from_hbc(table: MITable) -> MITable:
    """MABC table made of the HBC phase-3/4 entries."""
    return MITable(protocol=Protocol.MABC, entries={
        (1, Link.UPLINK_A): table[(3, Link.UPLINK_A)],
        (1, Link.UPLINK_B): table[(3, Link.UPLINK_B)],
        (1, Link.MAC_SUM): table[(3, Link.MAC_SUM)],
        (2, Link.DOWNLINK_A): table[(4, Link.DOWNLINK_A)],
        (2, Link.DOWNLINK_B): table[(4, Link.DOWNLINK_B)],
    })


def tdbc_from_hbc(table: MITable) -> MITable:
    entries = {k: v for k, v in table.entries.items() if k[0] in (1, 2)}
    entries[(3, Link.DOWNLINK_A)] = table[(4, Link.DOWNLINK_A)]
    entries[(3, Link.DOWNLINK_B)] = table[(4, Link.DOWNLINK_B)]
    return MITable(protocol=Protocol.TDBC, entries=entries)


def vertices(region) -> np.ndarray:
    """Vertex array of shape (n, 2), for comparisons with pytest.approx."""
    return np.array(region.points(), dtype=float).reshape(-1, 2)
