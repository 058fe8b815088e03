import pytest
from fastapi.testclient import TestClient

from predgroups.cluster import ClusterAssignment, KMeans
from predgroups.recommend import Recommender
from predgroups.service import ServiceState, create_app
from predgroups.synthetic import topical_corpus
from predgroups.vectorize import TfidfTextVectorizer


@pytest.fixture
def client():
    corpus = topical_corpus(3, 6, seed=51)
    doc_ids = sorted(corpus.contributions)
    texts = [corpus.contribution_text(c) for c in doc_ids]
    vectorizer = TfidfTextVectorizer().fit(texts)
    model = KMeans(n_clusters=3, seed=0).fit(vectorizer.transform(texts))
    recommender = Recommender(
        corpus, vectorizer, model,
        ClusterAssignment.from_labels(doc_ids, model.labels_),
    )
    state = ServiceState(
        recommender=recommender,
        fingerprint=vectorizer.fingerprint,
        algorithm="kmeans",
        k=3,
    )
    return TestClient(create_app(state))


@pytest.fixture
def empty_client():
    return TestClient(create_app(ServiceState()))


def test_health(client, empty_client):
    assert client.get("/health").json() == {"status": "ok", "model_loaded": True}
    assert empty_client.get("/health").json() == {
        "status": "ok",
        "model_loaded": False,
    }


def test_model_info(client):
    payload = client.get("/model").json()
    assert payload["algorithm"] == "kmeans"
    assert payload["k"] == 3
    assert len(payload["fingerprint"]) == 64


def test_model_info_unloaded_503(empty_client):
    assert empty_client.get("/model").status_code == 503


def test_recommend_happy_path(client):
    response = client.post("/recommend", json={"title": "word1x1 word1x2 word1x3"})
    assert response.status_code == 200
    body = response.json()
    assert body["empty"] is False
    assert body["predicates"][0]["support"] >= body["predicates"][-1]["support"]
    assert all(
        {"id", "label", "support", "support_fraction"} <= set(p)
        for p in body["predicates"]
    )


def test_empty_body_is_400(client):
    assert client.post("/recommend", json={}).status_code == 400


def test_unloaded_model_is_503(empty_client):
    response = empty_client.post("/recommend", json={"title": "x"})
    assert response.status_code == 503


def test_empty_recommendation_is_200_with_flag(client):
    response = client.post("/recommend", json={"title": "zz qq completely unseen"})
    assert response.status_code == 200
    body = response.json()
    # the query vector is zero; whichever cluster wins, the response shape holds
    assert "zero_vector" in body["flags"]
    assert isinstance(body["empty"], bool)


def test_repeated_requests_identical(client):
    payload = {"title": "word2x1 word2x4", "abstract": "word2x2 word2x3"}
    bodies = {client.post("/recommend", json=payload).text for _ in range(25)}
    assert len(bodies) == 1


def test_malformed_json_is_4xx(client):
    response = client.post(
        "/recommend", content=b"{not json", headers={"content-type": "application/json"}
    )
    assert 400 <= response.status_code < 500
