from pathlib import Path

import pytest

from sleepscreen import dataset

DATA = Path(__file__).resolve().parent.parent / "data" / "sleep_synth.csv"


@pytest.fixture(scope="session")
def data_path():
    return DATA


@pytest.fixture(scope="session")
def encoded_table():
    return dataset.load_encoded(DATA)


@pytest.fixture(scope="session")
def train_test(encoded_table):
    return dataset.stratified_split(encoded_table, 0.8, seed=1)
