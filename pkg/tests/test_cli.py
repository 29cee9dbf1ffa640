import os
import signal

import pytest

import support
from fluidtag import corpus, crl
from fluidtag.cli import main
from fluidtag.store import TagStore

TOKENS = {
    "admin": "tok-admin",
    "gridaphobe": "tok-grid",
    "einsteintoolkit.org": "tok-etk",
}


@pytest.fixture(scope="module")
def server(tmp_path_factory):
    """Real HTTP server over a fresh store, with a seeded credential file."""
    base = tmp_path_factory.mktemp("cli")
    creds = base / "credentials"
    creds.write_text("".join(f"{user} {token}\n" for user, token in TOKENS.items()))
    port = support.free_port()
    proc = support.spawn_server(base / "store", creds, port)
    yield {"url": f"http://127.0.0.1:{port}", "store": base / "store"}
    proc.send_signal(signal.SIGTERM)
    proc.wait(timeout=10)


@pytest.fixture(scope="module")
def published(server, tmp_path_factory):
    """Closure corpus published through the real CLI."""
    tree = tmp_path_factory.mktemp("tree")
    manifest = corpus.write_corpus(tree, corpus.closure_specs())
    rc = main(["publish", str(tree), "--manifest", str(manifest),
               "--server", server["url"], "--token", TOKENS["gridaphobe"],
               "--user", "gridaphobe"])
    assert rc == 0
    abouts_file = tmp_path_factory.mktemp("lists") / "toolkit-abouts"
    toolkit = [f"CCTK:{s.key}" for s in corpus.closure_specs() if s.toolkit]
    abouts_file.write_text("\n".join(toolkit) + "\n")
    rc = main(["tag-membership", "einsteintoolkit.org/includes", "True",
               "--abouts", str(abouts_file),
               "--server", server["url"], "--token", TOKENS["einsteintoolkit.org"]])
    assert rc == 0
    return {"toolkit": toolkit}


class TestPipeline:
    def test_thornlist_to_stdout(self, server, published, capsys):
        rc = main(["thornlist", "--query", "einsteintoolkit.org/includes = True",
                   "--prefixes", "gridaphobe/CCTK",
                   "--server", server["url"], "--token", TOKENS["gridaphobe"]])
        assert rc == 0
        document = capsys.readouterr().out
        entries = crl.parse(document)
        assert len(entries) == len(published["toolkit"])

    def test_thornlist_to_file(self, server, published, tmp_path):
        out = tmp_path / "thornlist.crl"
        rc = main(["thornlist", "--query", "has gridaphobe/CCTK/name",
                   "--prefixes", "gridaphobe/CCTK", "-o", str(out),
                   "--server", server["url"], "--token", TOKENS["gridaphobe"]])
        assert rc == 0
        assert len(crl.parse(out.read_text())) == 20

    def test_resolve_prints_closure(self, server, published, capsys):
        rc = main(["resolve", "--base", ",".join(corpus.CLOSURE_BASE),
                   "--prefixes", "gridaphobe/CCTK",
                   "--server", server["url"], "--token", TOKENS["gridaphobe"]])
        assert rc == 0
        lines = tuple(capsys.readouterr().out.splitlines())
        assert lines == corpus.CLOSURE_EXPECTED

    def test_resolve_crl_output(self, server, published, capsys):
        rc = main(["resolve", "--base", ",".join(corpus.CLOSURE_BASE),
                   "--prefixes", "gridaphobe/CCTK", "--crl",
                   "--server", server["url"], "--token", TOKENS["gridaphobe"]])
        assert rc == 0
        entries = crl.parse(capsys.readouterr().out)
        assert {f"{e.arrangement}/{e.checkout}" for e in entries} == \
            {about.split(":", 1)[1] for about in corpus.CLOSURE_EXPECTED}

    def test_authors_flow(self, server, published, capsys):
        rc = main(["authors", "--server", server["url"],
                   "--token", TOKENS["gridaphobe"]])
        assert rc == 0
        assert capsys.readouterr().out == ""  # nobody tagged yet

    def test_env_var_configuration(self, server, published, capsys, monkeypatch):
        monkeypatch.setenv("FLUIDTAG_SERVER", server["url"])
        monkeypatch.setenv("FLUIDTAG_TOKEN", TOKENS["gridaphobe"])
        rc = main(["thornlist", "--query", "has gridaphobe/CCTK/name",
                   "--prefixes", "gridaphobe/CCTK"])
        assert rc == 0
        assert "!CRL_VERSION" in capsys.readouterr().out


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        assert main(["thornlist", "--prefixes", "x/y"]) == 1  # missing --query

    def test_bad_query_is_1(self, server, capsys):
        rc = main(["thornlist", "--query", "has has", "--prefixes", "a/b",
                   "--server", server["url"], "--token", TOKENS["gridaphobe"]])
        assert rc == 1

    def test_publish_without_user_or_prefix_is_1(self, server, tmp_path, capsys):
        (tmp_path / "manifest").write_text("")
        rc = main(["publish", str(tmp_path), "--manifest", str(tmp_path / "manifest"),
                   "--server", server["url"], "--token", TOKENS["gridaphobe"]])
        assert rc == 1

    def test_unreachable_server_is_2(self, capsys):
        rc = main(["authors", "--server", "http://127.0.0.1:9",
                   "--token", "whatever"])
        assert rc == 2

    def test_unknown_base_thorn_is_3(self, server, published, capsys):
        rc = main(["resolve", "--base", "CCTK:No/Such",
                   "--prefixes", "gridaphobe/CCTK",
                   "--server", server["url"], "--token", TOKENS["gridaphobe"]])
        assert rc == 3

    def test_incomplete_publish_is_3(self, server, tmp_path, capsys):
        corpus.write_thorn(tmp_path, corpus.closure_specs()[0])
        (tmp_path / "manifest").write_text("")  # no entries at all
        rc = main(["publish", str(tmp_path), "--manifest", str(tmp_path / "manifest"),
                   "--server", server["url"], "--token", TOKENS["gridaphobe"],
                   "--user", "gridaphobe"])
        assert rc == 3


class TestReindexCommand:
    def test_reindex_runs_on_idle_store(self, tmp_path, capsys):
        store = support.open_store(tmp_path / "store")
        store.ensure_user("eric", "t")
        oid = store.create_object("eric", "reindex me")
        from fluidtag.model import classify_value
        for i in range(5):
            store.put_tag("eric", oid, "eric/rating", classify_value(i))
        store.close()
        assert main(["reindex", "--store", str(tmp_path / "store")]) == 0
        out = capsys.readouterr().out
        assert "reindexed" in out
        with TagStore(tmp_path / "store") as reopened:
            assert reopened.get_tag("eric", oid, "eric/rating").payload == 4

    def test_reindex_refuses_locked_store(self, server):
        assert main(["reindex", "--store", str(server["store"])]) == 2


class TestServerLock:
    def test_second_server_refuses_same_store(self, server):
        port = support.free_port()
        with pytest.raises(RuntimeError) as err:
            support.spawn_server(server["store"], os.devnull, port)
        assert "locked" in str(err.value)
