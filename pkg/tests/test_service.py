import json

import pytest

import support
from fluidtag.client import ApiError
from fluidtag.model import TagValue, classify_value


@pytest.fixture
def eric(store, api):
    api.create_user("eric", "tok-eric")
    return support.client_for(api, "tok-eric")


@pytest.fixture
def anon(api):
    return support.client_for(api, None)


class TestAuth:
    def test_health_needs_no_auth(self, anon):
        assert anon.healthz()

    def test_mutations_require_auth(self, anon):
        with pytest.raises(ApiError) as err:
            anon.create_object()
        assert err.value.status == 401

    def test_bad_token_is_rejected_even_on_reads(self, store, api):
        bad = support.client_for(api, "not-a-token")
        with pytest.raises(ApiError) as err:
            bad.query("has eric/seen")
        assert err.value.status == 401

    def test_anonymous_can_read_open_tags(self, eric, anon):
        oid = eric.create_object("public thing")
        eric.put_tag(oid, "eric/rating", classify_value(5))
        assert anon.get_tag(oid, "eric/rating").payload == 5
        assert anon.query("has eric/rating") == [oid]


class TestErrors:
    def test_duplicate_user_is_409(self, api):
        api.create_user("dup", "tok-dup")
        with pytest.raises(ApiError) as err:
            api.create_user("dup", "tok-dup2")
        assert (err.value.status, err.value.code) == (409, "duplicate")

    def test_non_admin_create_user_is_403(self, eric):
        with pytest.raises(ApiError) as err:
            eric.create_user("sidekick", "t")
        assert err.value.status == 403

    def test_query_syntax_is_400(self, anon):
        with pytest.raises(ApiError) as err:
            anon.query("has has has")
        assert (err.value.status, err.value.code) == (400, "query-syntax")

    def test_unknown_object_is_404(self, anon):
        with pytest.raises(ApiError) as err:
            anon.get_tag("no-such", "eric/rating")
        assert err.value.status == 404

    def test_about_write_is_412(self, eric):
        oid = eric.create_object("immutable me")
        with pytest.raises(ApiError) as err:
            eric.put_tag(oid, "fluiddb/about", classify_value("other"))
        assert (err.value.status, err.value.code) == (412, "immutable-tag")

    def test_foreign_write_is_403(self, api, eric):
        api.create_user("john", "tok-john")
        john = support.client_for(api, "tok-john")
        oid = eric.create_object()
        eric.put_tag(oid, "eric/rating", classify_value(1))
        with pytest.raises(ApiError) as err:
            john.put_tag(oid, "eric/rating", classify_value(2))
        assert err.value.status == 403

    def test_closed_read_is_404_not_403(self, api, eric):
        api.create_user("bob", "tok-bob")
        bob = support.client_for(api, "tok-bob")
        oid = eric.create_object()
        eric.put_tag(oid, "eric/hidden", classify_value(1))
        eric.set_permission("eric/hidden", "read", "closed", ["eric"])
        with pytest.raises(ApiError) as err:
            bob.get_tag(oid, "eric/hidden")
        assert err.value.status == 404


class TestWireFormats:
    def test_primitive_kinds_round_trip(self, eric):
        oid = eric.create_object()
        for raw in (6, 2.5, True, None, "words here", ["b", "a"]):
            eric.put_tag(oid, "eric/value", classify_value(raw))
            assert eric.get_tag(oid, "eric/value") == classify_value(raw)

    def test_put_json_number_yields_integer_instance(self, eric):
        oid = eric.create_object()
        kind = eric.put_tag(oid, "eric/rating", classify_value(json.loads("6")))
        assert kind == "integer"

    def test_opaque_round_trip_byte_identical_with_content_type(self, eric):
        payload = bytes(range(256))
        oid = eric.create_object()
        eric.put_tag(oid, "eric/blob", TagValue("opaque", payload, "application/x-stuff"))
        raw, content_type = eric.get_tag_raw(oid, "eric/blob")
        assert raw == payload
        assert content_type == "application/x-stuff"

    def test_json_array_of_numbers_is_opaque_and_byte_exact(self, eric):
        oid = eric.create_object()
        resp = eric._http.put(
            f"/objects/{oid}/eric/arr", content=b"[1,  2, 3]",
            headers={"Content-Type": "application/json",
                     "Authorization": "Bearer tok-eric"})
        assert resp.json()["kind"] == "opaque"
        raw, content_type = eric.get_tag_raw(oid, "eric/arr")
        assert raw == b"[1,  2, 3]"
        assert content_type == "application/json"

    def test_string_set_renders_sorted(self, eric):
        oid = eric.create_object()
        eric.put_tag(oid, "eric/set", classify_value({"zeta", "alpha"}))
        raw, _ = eric.get_tag_raw(oid, "eric/set")
        assert json.loads(raw) == ["alpha", "zeta"]


class TestAboutRoutes:
    def test_put_by_about_auto_creates(self, eric):
        oid = eric.put_about_tag("CCTK:Carpet/Carpet", "eric/note", classify_value("hi"))
        assert eric.get_about_tag("CCTK:Carpet/Carpet", "eric/note").payload == "hi"
        assert eric.get_tag(oid, "fluiddb/about").payload == "CCTK:Carpet/Carpet"

    def test_get_unknown_about_is_404(self, eric):
        with pytest.raises(ApiError) as err:
            eric.get_about_tag("CCTK:Nowhere/Nothing", "eric/note")
        assert err.value.status == 404

    def test_abouts_with_odd_characters(self, eric):
        about = "weird about: spaces / slashes ?#% and unicode é"
        eric.put_about_tag(about, "eric/note", classify_value(1))
        assert eric.get_about_tag(about, "fluiddb/about").payload == about

    def test_delete_by_about(self, eric):
        eric.put_about_tag("CCTK:A/B", "eric/note", classify_value(1))
        eric.delete_about_tag("CCTK:A/B", "eric/note")
        with pytest.raises(ApiError) as err:
            eric.get_about_tag("CCTK:A/B", "eric/note")
        assert err.value.status == 404


class TestQueryRoute:
    def test_sorted_ids_and_multi_get(self, eric):
        oids = []
        for i in range(5):
            oid = eric.create_object(f"thing {i}")
            eric.put_tag(oid, "eric/rating", classify_value(i))
            oids.append(oid)
        ids = eric.query("eric/rating >= 2")
        assert ids == sorted(ids)
        assert set(ids) == set(oids[2:])
        ids, results = eric.query("eric/rating >= 2",
                                  tags=["eric/rating", "eric/missing", "fluiddb/about"])
        for oid in ids:
            assert "eric/missing" not in results[oid]
            assert results[oid]["eric/rating"].kind == "integer"
            assert results[oid]["fluiddb/about"].kind == "string"

    def test_multi_get_opaque_envelope(self, eric):
        oid = eric.create_object("blobbed")
        eric.put_tag(oid, "eric/blob", TagValue("opaque", b"\x00\x01", "application/x-b"))
        _, results = eric.query("has eric/blob", tags=["eric/blob"])
        value = results[oid]["eric/blob"]
        assert value.kind == "opaque"
        assert value.payload == b"\x00\x01"
        assert value.mime == "application/x-b"


class TestListingRoute:
    def test_lists_visible_tags(self, eric, anon):
        oid = eric.create_object("listed thing")
        eric.put_tag(oid, "eric/rating", classify_value(1))
        eric.put_tag(oid, "eric/hidden", classify_value(2))
        eric.set_permission("eric/hidden", "read", "closed", ["eric"])
        assert [p for p, _ in eric.list_tags(oid)] == \
            ["eric/hidden", "eric/rating", "fluiddb/about"]
        assert [p for p, _ in anon.list_tags(oid)] == ["eric/rating", "fluiddb/about"]


class TestPermissionRoutes:
    def test_set_and_read_back(self, eric):
        oid = eric.create_object()
        eric.put_tag(oid, "eric/rating", classify_value(1))
        eric.set_permission("eric/rating", "update", "closed", ["bob", "ann"])
        assert eric.get_permission("eric/rating", "update") == ("closed", ["ann", "bob"])

    def test_namespace_actions(self, eric):
        eric.create_namespace("eric/CCTK")
        eric.set_permission("eric/CCTK", "create", "open", [])
        assert eric.get_permission("eric/CCTK", "create") == ("open", [])
        with pytest.raises(ApiError) as err:
            eric.get_permission("eric/CCTK", "update")  # not a namespace action
        assert err.value.status == 400


class TestEquivalenceWithLibrary:
    """Every API call behaves like the corresponding in-process call."""

    def test_scripted_scenario(self, tmp_path):
        lib = support.open_store(tmp_path / "lib")
        srv = support.open_store(tmp_path / "srv")
        api = support.service_client(srv, token=support.ADMIN_TOKEN)

        def both(fn_lib, fn_api, compare=True):
            lib_out, api_out = None, None
            try:
                lib_out = ("ok", fn_lib())
            except Exception as exc:
                lib_out = ("err", getattr(exc, "code", type(exc).__name__))
            try:
                api_out = ("ok", fn_api())
            except ApiError as exc:
                api_out = ("err", exc.code)
            assert lib_out[0] == api_out[0], (lib_out, api_out)
            if lib_out[0] == "err" or compare:
                assert lib_out[1] == api_out[1], (lib_out, api_out)
            return lib_out[1], api_out[1]

        both(lambda: lib.create_user("admin", "eric", "t1") and None,
             lambda: api.create_user("eric", "t1"))
        both(lambda: lib.create_user("admin", "eric", "t1"),
             lambda: api.create_user("eric", "t1"))  # duplicate on both
        eric_api = support.client_for(api, "t1")
        # ids differ across independent stores, so compare outcomes only
        lib_oid, api_oid = both(lambda: lib.create_object("eric", "same thing"),
                                lambda: eric_api.create_object("same thing"),
                                compare=False)
        value = classify_value(["x", "y"])
        both(lambda: lib.put_tag("eric", lib_oid, "eric/set", value) and None,
             lambda: eric_api.put_tag(api_oid, "eric/set", value) and None)
        both(lambda: lib.get_tag("eric", lib_oid, "eric/set"),
             lambda: eric_api.get_tag(api_oid, "eric/set"))
        both(lambda: lib.get_tag("eric", lib_oid, "eric/none"),
             lambda: eric_api.get_tag(api_oid, "eric/none"))  # not-found on both
        both(lambda: lib.put_tag("eric", lib_oid, "fluiddb/about", classify_value("x")),
             lambda: eric_api.put_tag(api_oid, "fluiddb/about", classify_value("x")))
        both(lambda: lib.list_object_tags("eric", lib_oid),
             lambda: eric_api.list_tags(api_oid))
        both(lambda: lib.delete_tag("eric", lib_oid, "eric/set"),
             lambda: eric_api.delete_tag(api_oid, "eric/set"))
        both(lambda: lib.delete_tag("eric", lib_oid, "eric/set"),
             lambda: eric_api.delete_tag(api_oid, "eric/set"))  # gone on both
        lib.close()
        srv.close()


class TestServeConfig:
    def test_bind_parsing(self):
        from fluidtag.service import ServeConfig
        assert ServeConfig(bind="0.0.0.0:9000").host_port() == ("0.0.0.0", 9000)
        with pytest.raises(Exception):
            ServeConfig(bind="nonsense").host_port()

    def test_credential_file_parsing(self, tmp_path):
        from fluidtag.service import load_credentials
        path = tmp_path / "creds"
        path.write_text("# comment\nadmin tok-admin\neric  tok-eric\n\n")
        assert load_credentials(path) == {"admin": "tok-admin", "eric": "tok-eric"}
