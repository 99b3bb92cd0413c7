final AlertDialog alertDialog = alert.create();
etName.setOnFocusChangeListener(new OnFocusChangeListener(){
		@Override
		public void onFocusChange(View arg0, boolean hasFocus) {
			if (hasFocus) { 
				alertDialog.getWindow().setSoftInputMode(
								WindowManager.LayoutParams.SOFT_INPUT_STATE_ALWAYS_VISIBLE);
			}
		}

	});
