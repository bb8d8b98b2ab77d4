import datetime

import pytest

from bnbprice.ingest import Dataset, ListingRecord, ReviewRecord


def make_listing(lid, **kw):
    """ListingRecord with sane defaults, overridable per field."""
    base = dict(
        id=lid, city="testville", latitude=34.0 + lid * 0.01,
        longitude=-118.0 + lid * 0.01, price_usd=100.0 + lid,
        accommodates=2, availability_365=180, reviews_per_month=1.0,
        host_is_superhost=False, host_since=datetime.date(2015, 6, 1),
        neighbourhood="Mission", room_type="Private room", bedrooms=1.0,
        description="cozy place near the beach",
    )
    base.update(kw)
    return ListingRecord(**base)


def make_review(listing_id, review_id, comments, when=None):
    return ReviewRecord(listing_id=listing_id, review_id=review_id,
                        date=when or datetime.date(2021, 3, 14),
                        comments=comments)


def make_dataset(listings, reviews=()):
    grouped = {rec.id: [] for rec in listings}
    for rv in reviews:
        grouped[rv.listing_id].append(rv)
    return Dataset(listings=tuple(listings),
                   reviews_by_listing={k: tuple(v) for k, v in grouped.items()},
                   drop_log={})


@pytest.fixture
def listing_factory():
    return make_listing
