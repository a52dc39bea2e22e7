import pytest

from src.errors import PreconditionError
from src.gadgets import Gadget
from src.gadgets.ec import verify_ec_gadget
from src.gadgets.mu1 import build_mu1_product, mu1_models, mu1_sample_model, verify_mu1_polymorphism
from src.gadgets.nae import verify_nae_gadget
from src.gadgets.simple_inf import build_simple_inf_product, simple_inf_sample_model, verify_simple_inf_polymorphism
from src.gadgets.triangle import build_triangle_witness_model, phi_packing, verify_triangle_gadget
from src.presets import preset_query
from src.queries import make_structure, satisfies


def test_registry() -> None:
    assert Gadget.list_available() == ["ec", "mu1", "nae", "simple-inf", "triangle"]
    for name in Gadget.list_available():
        assert Gadget.by_name(name)().get_description()


def test_nae() -> None:
    report = verify_nae_gadget()
    assert report.passed
    assert len(report.claims) == 8


def test_ec() -> None:
    report = verify_ec_gadget()
    assert report.passed, report.failures()
    assert report.to_dict()["failures"] == []


def test_mu1_sample_model() -> None:
    report = verify_mu1_polymorphism(mu1_sample_model())
    assert report.passed, report.failures()


def test_mu1_single_point() -> None:
    point = make_structure(["0"], {"S": [("0",)], "R": []}, preset_query("mu1").signature)
    assert verify_mu1_polymorphism(point).passed


def test_mu1_product_avoids_query() -> None:
    mu = preset_query("mu1")
    for product in build_mu1_product(mu1_sample_model()):
        assert not satisfies(product, mu)


@pytest.mark.slow
def test_mu1_small_models() -> None:
    checked = 0
    for model in mu1_models(2):
        report = verify_mu1_polymorphism(model)
        assert report.passed, (model, report.failures())
        checked += 1
    assert checked > 0


def test_mu1_rejects_query_model() -> None:
    model = make_structure(["a", "b"], {"S": [("a",)], "R": [("a", "b"), ("b", "a"), ("b", "b")]})
    with pytest.raises(PreconditionError) as error:
        build_mu1_product(model)
    assert error.value.witness is not None


def test_simple_inf() -> None:
    report = verify_simple_inf_polymorphism(simple_inf_sample_model())
    assert report.passed, report.failures()


def test_simple_inf_rejects_query_model() -> None:
    model = make_structure(
        ["0", "1"], {"R": [("0", "1")], "S": [("0", "1", "1")]}, preset_query("simple-inf").signature
    )
    with pytest.raises(PreconditionError) as error:
        build_simple_inf_product(model)
    assert error.value.witness == {"x": "0", "y": "1", "z": "1"}


def test_triangle_witness_model() -> None:
    model = build_triangle_witness_model()
    assert model.size() == 65
    assert not satisfies(model, preset_query("triangle"))


def test_phi_packing() -> None:
    packing = phi_packing()
    assert packing is not None
    assert len(packing) == 7


@pytest.mark.slow
def test_triangle_gadget() -> None:
    report = verify_triangle_gadget()
    assert report.passed, report.failures()
