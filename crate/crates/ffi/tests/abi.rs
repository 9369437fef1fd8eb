use std::ffi::{CStr, CString};
use std::ptr;

use ftsteiner_ffi::*;

unsafe fn path_graph() -> *mut FtsGraph {
    let edges = [0u32, 1, 1, 2, 2, 3];
    let terminals = [0u32, 3];
    let mut g = ptr::null_mut();
    assert_eq!(fts_graph_new(4, edges.as_ptr(), 3, terminals.as_ptr(), 2, &mut g), FtsStatus::Ok);
    g
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fts_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn build_query_and_serialize() {
    unsafe {
        let g = path_graph();
        let mut cut = false;
        assert_eq!(fts_is_steiner_cut(g, [1u32].as_ptr(), 1, &mut cut), FtsStatus::Ok);
        assert!(cut);

        for scheme in [FtsScheme::Main, FtsScheme::Warmup] {
            let mut l = ptr::null_mut();
            assert_eq!(fts_labeling_build(g, 2, scheme, &mut l), FtsStatus::Ok);
            let mut len = 0;
            assert_eq!(fts_labeling_len(l, &mut len), FtsStatus::Ok);
            assert_eq!(len, 4);
            assert_eq!(fts_labeling_query(l, [2u32].as_ptr(), 1, &mut cut), FtsStatus::Ok);
            assert!(cut);
            assert_eq!(fts_labeling_query(l, [0u32].as_ptr(), 1, &mut cut), FtsStatus::Ok);
            assert!(!cut);

            let mut a = FtsBuffer { data: ptr::null_mut(), len: 0 };
            let mut b = FtsBuffer { data: ptr::null_mut(), len: 0 };
            assert_eq!(fts_label_serialize(l, 0, &mut a), FtsStatus::Ok);
            assert_eq!(fts_label_serialize(l, 3, &mut b), FtsStatus::Ok);
            fts_labeling_free(l);

            // Removing both terminals leaves nothing to separate.
            let ptrs = [a.data as *const u8, b.data as *const u8];
            let lens = [a.len, b.len];
            assert_eq!(fts_query_serialized(scheme, ptrs.as_ptr(), lens.as_ptr(), 2, &mut cut), FtsStatus::Ok);
            assert!(!cut);

            *a.data ^= 0x10;
            let status = fts_query_serialized(scheme, ptrs.as_ptr(), lens.as_ptr(), 2, &mut cut);
            assert_ne!(status, FtsStatus::Ok);
            assert!(!last_error().is_empty());
            fts_buffer_free(a);
            fts_buffer_free(b);
        }
        fts_graph_free(g);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut g = ptr::null_mut();
        let bad = CString::new("3 1 1\n0 7\n0\n").unwrap();
        assert_ne!(fts_graph_from_text(bad.as_ptr(), &mut g), FtsStatus::Ok);
        assert!(g.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(fts_graph_from_text(ptr::null(), &mut g), FtsStatus::NullPointer);
        let good = CString::new("3 2 2\n0 1\n1 2\n0 2\n").unwrap();
        assert_eq!(fts_graph_from_text(good.as_ptr(), &mut g), FtsStatus::Ok);
        let mut n = 0;
        assert_eq!(fts_graph_vertex_count(g, &mut n), FtsStatus::Ok);
        assert_eq!(n, 3);

        let mut l = ptr::null_mut();
        assert_eq!(fts_labeling_build(g, 1, FtsScheme::Main, &mut l), FtsStatus::Ok);
        let mut cut = false;
        assert_eq!(fts_labeling_query(l, [0u32, 1].as_ptr(), 2, &mut cut), FtsStatus::InvalidArgument);
        assert_eq!(fts_labeling_query(l, [9u32].as_ptr(), 1, &mut cut), FtsStatus::InvalidArgument);
        assert_eq!(fts_labeling_query(l, [1u32].as_ptr(), 1, ptr::null_mut()), FtsStatus::NullPointer);

        // Labels from two different labelings cannot be combined.
        let h = path_graph();
        let mut other = ptr::null_mut();
        assert_eq!(fts_labeling_build(h, 2, FtsScheme::Main, &mut other), FtsStatus::Ok);
        let mut mine = FtsBuffer { data: ptr::null_mut(), len: 0 };
        let mut theirs = FtsBuffer { data: ptr::null_mut(), len: 0 };
        fts_label_serialize(l, 1, &mut mine);
        fts_label_serialize(other, 1, &mut theirs);
        let ptrs = [mine.data as *const u8, theirs.data as *const u8];
        let lens = [mine.len, theirs.len];
        let status = fts_query_serialized(FtsScheme::Main, ptrs.as_ptr(), lens.as_ptr(), 2, &mut cut);
        assert!(matches!(status, FtsStatus::LabelMix | FtsStatus::InvalidArgument), "{status:?}");

        fts_buffer_free(mine);
        fts_buffer_free(theirs);
        fts_labeling_free(l);
        fts_labeling_free(other);
        fts_graph_free(g);
        fts_graph_free(h);
        fts_graph_free(ptr::null_mut());
    }
}
